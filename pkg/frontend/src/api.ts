/**
 * Typed client for the context service HTTP API.
 */

export type EntityKind = "developer" | "resource" | "task" | "revision";
export type FocusKind = "developer" | "resource" | "task";

export interface SearchResult {
    id: string;
    label: string;
    kind: string;
}

export interface SearchResponse {
    query: string;
    kind: string;
    results: SearchResult[];
}

export interface ContextEntry {
    id: string;
    label: string;
    score: number;
    kinds: string[];
    evidence: string[];
}

export interface ContextView {
    focus: { kind: string; id: string };
    generated_at: string;
    k: number;
    developers: ContextEntry[];
    resources: ContextEntry[];
    tasks: ContextEntry[];
}

export interface Stats {
    entities: Record<string, number>;
    relations: Record<string, number>;
    extraction: Record<string, number | string>;
}

export class ApiError extends Error {
    constructor(
        public status: number,
        public code: string,
        message: string,
    ) {
        super(message);
        this.name = "ApiError";
    }
}

interface ResponseLike {
    ok: boolean;
    status: number;
    json(): Promise<unknown>;
}

export type FetchLike = (url: string, init?: { signal?: AbortSignal }) => Promise<ResponseLike>;

/** Encode an entity id for a URL path while keeping its slashes. */
export function encodeEntityPath(id: string): string {
    return id.split("/").map(encodeURIComponent).join("/");
}

const CONTEXT_SEGMENTS: Record<FocusKind, string> = {
    developer: "developers",
    resource: "resources",
    task: "tasks",
};

export class ApiClient {
    constructor(
        private base: string,
        private fetchFn: FetchLike = (url, init) => fetch(url, init),
    ) {}

    private async get<T>(path: string, signal?: AbortSignal): Promise<T> {
        let response: ResponseLike;
        try {
            response = await this.fetchFn(this.base + path, { signal });
        } catch (err) {
            if ((err as Error).name === "AbortError") throw err;
            throw new ApiError(0, "unreachable", `cannot reach ${this.base || "the API"}`);
        }
        let body: unknown = null;
        try {
            body = await response.json();
        } catch {
            body = null;
        }
        if (!response.ok) {
            const detail = (body || {}) as { code?: string; message?: string };
            throw new ApiError(
                response.status,
                detail.code || "error",
                detail.message || `request failed with status ${response.status}`,
            );
        }
        return body as T;
    }

    search(query: string, kind = "any", limit = 20, signal?: AbortSignal): Promise<SearchResponse> {
        const params = new URLSearchParams({ q: query, kind, limit: String(limit) });
        return this.get(`/api/search?${params}`, signal);
    }

    context(kind: FocusKind, id: string, k = 10, signal?: AbortSignal): Promise<ContextView> {
        const segment = CONTEXT_SEGMENTS[kind];
        return this.get(`/api/${segment}/${encodeEntityPath(id)}/context?k=${k}`, signal);
    }

    entity(kind: EntityKind, id: string, signal?: AbortSignal): Promise<Record<string, unknown>> {
        return this.get(`/api/entities/${kind}/${encodeEntityPath(id)}`, signal);
    }

    stats(signal?: AbortSignal): Promise<Stats> {
        return this.get("/api/stats", signal);
    }
}
