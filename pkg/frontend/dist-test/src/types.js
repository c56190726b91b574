// JSON shapes of the /v1 API. The animator renders these and nothing else:
// every displayed fact comes from one of these fields.
export {};
