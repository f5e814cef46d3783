/**
 * Route model and the back stack.
 */

import type { FocusKind } from "./api.js";

export type Route =
    | { name: "home" }
    | { name: "search"; query: string }
    | { name: "context"; kind: FocusKind; id: string; k: number };

export function sameRoute(a: Route, b: Route): boolean {
    if (a.name !== b.name) return false;
    if (a.name === "search" && b.name === "search") return a.query === b.query;
    if (a.name === "context" && b.name === "context") {
        return a.kind === b.kind && a.id === b.id && a.k === b.k;
    }
    return true;
}

/** Linear visit history; back pops to the previously shown route. */
export class HistoryStack {
    private past: Route[] = [];
    private present: Route | null = null;

    get current(): Route | null {
        return this.present;
    }

    get canGoBack(): boolean {
        return this.past.length > 0;
    }

    /** Record a navigation. Re-visiting the current route is a no-op. */
    visit(route: Route): void {
        if (this.present && sameRoute(this.present, route)) return;
        if (this.present) this.past.push(this.present);
        this.present = route;
    }

    /** Step back; returns the route to show, or null at the bottom. */
    back(): Route | null {
        const previous = this.past.pop();
        if (!previous) return null;
        this.present = previous;
        return previous;
    }
}
