// Thin fetch wrapper for the /v1 session API.
export class ApiError extends Error {
    constructor(status, code, detail) {
        super(`${code} (${status})`);
        this.status = status;
        this.code = code;
        this.detail = detail;
    }
}
async function request(method, path, body) {
    const resp = await fetch(path, {
        method,
        headers: body === undefined ? {} : { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
    });
    const data = await resp.json();
    if (!resp.ok) {
        const err = data;
        throw new ApiError(resp.status, err.error ?? "unknown", err.detail);
    }
    return data;
}
export class Client {
    constructor(base = "") {
        this.base = base;
    }
    createSession(modelText, name) {
        return request("POST", `${this.base}/v1/sessions`, { model: modelText, name });
    }
    examples() {
        return request("GET", `${this.base}/v1/examples`);
    }
    state(sid) {
        return request("GET", `${this.base}/v1/sessions/${sid}/state`);
    }
    enabled(sid) {
        return request("GET", `${this.base}/v1/sessions/${sid}/enabled`);
    }
    fire(sid, component, operation, binding) {
        return request("POST", `${this.base}/v1/sessions/${sid}/fire`, { component, operation, binding });
    }
    tick(sid) {
        return request("POST", `${this.base}/v1/sessions/${sid}/tick`);
    }
    undo(sid) {
        return request("POST", `${this.base}/v1/sessions/${sid}/undo`);
    }
    reset(sid) {
        return request("POST", `${this.base}/v1/sessions/${sid}/reset`);
    }
    trace(sid) {
        return request("GET", `${this.base}/v1/sessions/${sid}/trace`);
    }
    golden(sid, observe, scenario) {
        return request("POST", `${this.base}/v1/sessions/${sid}/golden`, { observe, scenario });
    }
    replay(sid, trace) {
        return request("POST", `${this.base}/v1/sessions/${sid}/replay`, { trace });
    }
}
