// Score-predictor sidecar: newline-delimited JSON on stdio.
//
// Requests:  {"op": "fit", "pairs": [[text, score], ...], "seed": n}
//            {"op": "predict", "texts": [...]}
//            {"op": "test_error"}
// Responses: {"ok": true, "values": [...]} | {"ok": false, "error": "..."}

// stdout carries only protocol lines; anything the runtime logs goes to stderr
console.log = (...args: unknown[]) => console.error(...args);
console.info = (...args: unknown[]) => console.error(...args);

import * as readline from "node:readline";

import { MIN_PAIRS, Pair, ScoreModel } from "./model";

function reply(payload: object): void {
    process.stdout.write(JSON.stringify(payload) + "\n");
}

function parsePairs(raw: unknown): Pair[] {
    if (!Array.isArray(raw)) {
        throw new Error("pairs must be an array");
    }
    return raw.map((item) => {
        if (!Array.isArray(item) || item.length !== 2 ||
            typeof item[0] !== "string" || typeof item[1] !== "number") {
            throw new Error("each pair must be [text, score]");
        }
        return [item[0], item[1]] as Pair;
    });
}

async function handle(model: ScoreModel, request: any): Promise<number[]> {
    switch (request.op) {
        case "fit": {
            const pairs = parsePairs(request.pairs);
            if (pairs.length < MIN_PAIRS) {
                throw new Error(`need at least ${MIN_PAIRS} pairs, got ${pairs.length}`);
            }
            const seed = typeof request.seed === "number" ? request.seed : 0;
            return [await model.fit(pairs, seed)];
        }
        case "predict": {
            if (!Array.isArray(request.texts)) {
                throw new Error("texts must be an array");
            }
            return model.predict(request.texts.map(String));
        }
        case "test_error": {
            if (model.testError === null) {
                throw new Error("test_error before fit");
            }
            return [model.testError];
        }
        default:
            throw new Error(`unknown op: ${request.op}`);
    }
}

async function main(): Promise<void> {
    const model = new ScoreModel();
    const lines = readline.createInterface({ input: process.stdin, terminal: false });
    // one request in flight at a time: the client serializes calls
    for await (const line of lines) {
        if (line.trim() === "") {
            continue;
        }
        try {
            const values = await handle(model, JSON.parse(line));
            reply({ ok: true, values });
        } catch (err) {
            reply({ ok: false, error: err instanceof Error ? err.message : String(err) });
        }
    }
}

main();
