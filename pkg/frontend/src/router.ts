/**
 * Hash-fragment routing. Shapes:
 *
 *   #/                          home (snapshot stats)
 *   #/search/<query>            search results
 *   #/context/<kind>/<id>?k=N   context view; <id> may contain slashes
 */

import type { FocusKind } from "./api.js";
import type { Route } from "./state.js";

export const DEFAULT_K = 10;

const FOCUS_KINDS = new Set<string>(["developer", "resource", "task"]);

export function formatHash(route: Route): string {
    switch (route.name) {
        case "home":
            return "#/";
        case "search":
            return `#/search/${encodeURIComponent(route.query)}`;
        case "context": {
            const id = route.id.split("/").map(encodeURIComponent).join("/");
            const suffix = route.k === DEFAULT_K ? "" : `?k=${route.k}`;
            return `#/context/${route.kind}/${id}${suffix}`;
        }
    }
}

export function parseHash(hash: string): Route {
    const raw = hash.startsWith("#") ? hash.slice(1) : hash;
    const cut = raw.indexOf("?");
    const path = cut < 0 ? raw : raw.slice(0, cut);
    const query = cut < 0 ? "" : raw.slice(cut + 1);
    const parts = path.split("/").filter((part) => part !== "");
    if (parts.length >= 2 && parts[0] === "search") {
        return { name: "search", query: decodeURIComponent(parts.slice(1).join("/")) };
    }
    if (parts.length >= 3 && parts[0] === "context" && FOCUS_KINDS.has(parts[1])) {
        return {
            name: "context",
            kind: parts[1] as FocusKind,
            id: parts.slice(2).map(decodeURIComponent).join("/"),
            k: parseK(query),
        };
    }
    return { name: "home" };
}

function parseK(query: string): number {
    const k = new URLSearchParams(query).get("k");
    // Number("") is 0, so a bare "?k=" must fall back explicitly.
    if (k === null || k === "") return DEFAULT_K;
    const parsed = Number(k);
    return Number.isInteger(parsed) && parsed >= 0 ? parsed : DEFAULT_K;
}

/** API base override: ?api=http://host:port on the page URL; default same origin. */
export function apiBaseFromLocation(search: string): string {
    const params = new URLSearchParams(search.startsWith("?") ? search.slice(1) : search);
    const api = params.get("api");
    return api ? api.replace(/\/+$/, "") : "";
}
