/**
 * Explorer wiring: hash -> fetch -> render, with a back stack.
 *
 * createApp builds an instance bound to a root element; the boot block at
 * the bottom starts one on #app when loaded in a page.
 */

import { ApiClient } from "./api.js";
import { HistoryStack, sameRoute } from "./state.js";
import type { Route } from "./state.js";
import { apiBaseFromLocation, formatHash, parseHash } from "./router.js";
import {
    renderContextView,
    renderError,
    renderHome,
    renderLoading,
    renderSearchResults,
} from "./render.js";

export interface AppWindow {
    location: { hash: string; search: string };
    addEventListener(type: string, listener: () => void): void;
}

export interface App {
    navigate(route: Route): Promise<void>;
    back(): Promise<void>;
    start(): Promise<void>;
    whenIdle(): Promise<void>;
    readonly stack: HistoryStack;
}

const SHELL = `
    <header class="topbar">
        <button id="back-btn" type="button" disabled>&#8592; back</button>
        <a class="home-link" href="#/">context explorer</a>
        <form id="search-form">
            <input id="search-input" type="search" autocomplete="off"
                   placeholder="search resources, tasks, developers">
            <button type="submit">search</button>
        </form>
    </header>
    <main id="view"></main>
`;

export function createApp(root: HTMLElement, api: ApiClient, win: AppWindow): App {
    root.innerHTML = SHELL;
    const viewEl = root.querySelector("#view") as HTMLElement;
    const backBtn = root.querySelector("#back-btn") as HTMLButtonElement;
    const searchForm = root.querySelector("#search-form") as HTMLFormElement;
    const searchInput = root.querySelector("#search-input") as HTMLInputElement;

    const stack = new HistoryStack();
    let controller: AbortController | null = null;
    let pending: Promise<void> = Promise.resolve();

    async function show(route: Route): Promise<void> {
        if (controller) controller.abort();
        controller = new AbortController();
        const signal = controller.signal;
        viewEl.innerHTML = renderLoading();
        try {
            if (route.name === "home") {
                const stats = await api.stats(signal);
                if (signal.aborted) return;
                viewEl.innerHTML = renderHome(stats);
            } else if (route.name === "search") {
                const resp = await api.search(route.query, "any", 20, signal);
                if (signal.aborted) return;
                viewEl.innerHTML = renderSearchResults(resp);
            } else {
                const view = await api.context(route.kind, route.id, route.k, signal);
                if (signal.aborted) return;
                viewEl.innerHTML = renderContextView(view);
            }
        } catch (err) {
            if (signal.aborted || (err as Error).name === "AbortError") return;
            viewEl.innerHTML = renderError((err as Error).message);
        }
        backBtn.disabled = !stack.canGoBack;
        if (route.name === "search") searchInput.value = route.query;
    }

    function syncHash(route: Route): void {
        const hash = formatHash(route);
        if (win.location.hash !== hash) win.location.hash = hash;
    }

    function navigate(route: Route): Promise<void> {
        stack.visit(route);
        syncHash(route);
        pending = show(route);
        return pending;
    }

    function back(): Promise<void> {
        const previous = stack.back();
        if (!previous) return Promise.resolve();
        syncHash(previous);
        pending = show(previous);
        return pending;
    }

    root.addEventListener("click", (event) => {
        const anchor = (event.target as Element).closest?.("a[href^='#/']");
        if (!anchor) return;
        event.preventDefault();
        navigate(parseHash(anchor.getAttribute("href") || "#/"));
    });

    searchForm.addEventListener("submit", (event) => {
        event.preventDefault();
        const query = searchInput.value.trim();
        if (query) navigate({ name: "search", query });
    });

    backBtn.addEventListener("click", () => {
        back();
    });

    win.addEventListener("hashchange", () => {
        const route = parseHash(win.location.hash);
        if (stack.current && sameRoute(stack.current, route)) return;
        navigate(route);
    });

    async function whenIdle(): Promise<void> {
        let seen: Promise<void>;
        do {
            seen = pending;
            await seen;
        } while (seen !== pending);
    }

    return {
        navigate,
        back,
        start: () => navigate(parseHash(win.location.hash)),
        whenIdle,
        stack,
    };
}

// Boot in a page; tests create their own instances on other elements.
if (typeof document !== "undefined") {
    const rootEl = document.getElementById("app");
    if (rootEl) {
        const api = new ApiClient(apiBaseFromLocation(window.location.search));
        createApp(rootEl, api, window).start();
    }
}
