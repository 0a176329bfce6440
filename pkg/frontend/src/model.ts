import * as tf from "@tensorflow/tfjs";

import { FEATURE_DIM, featurize } from "./features";

export type Pair = [string, number];

export const MIN_PAIRS = 10;
export const TRAIN_FRACTION = 0.8;

export interface FitOptions {
    epochs?: number;
    batchSize?: number;
    learningRate?: number;
}

const DEFAULTS: Required<FitOptions> = {
    epochs: 300,
    batchSize: 16,
    learningRate: 0.05,
};

// mulberry32: tiny seeded PRNG, good enough for shuffling
function rng(seed: number): () => number {
    let a = seed >>> 0;
    return () => {
        a = (a + 0x6d2b79f5) >>> 0;
        let t = Math.imul(a ^ (a >>> 15), 1 | a);
        t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
        return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
    };
}

/** Seeded 4:1 shuffle split; the test side always gets at least one pair. */
export function splitPairs(pairs: Pair[], seed: number): { train: Pair[]; test: Pair[] } {
    const order = pairs.map((_, i) => i);
    const random = rng(seed);
    for (let i = order.length - 1; i > 0; i--) {
        const j = Math.floor(random() * (i + 1));
        [order[i], order[j]] = [order[j], order[i]];
    }
    const nTrain = Math.min(
        pairs.length - 1,
        Math.max(1, Math.round(pairs.length * TRAIN_FRACTION)),
    );
    return {
        train: order.slice(0, nTrain).map((i) => pairs[i]),
        test: order.slice(nTrain).map((i) => pairs[i]),
    };
}

function clamp01(x: number): number {
    return Math.min(1, Math.max(0, x));
}

/**
 * Linear regressor over hashed n-gram features, trained with a fixed budget.
 * Weights start at zero, so training is deterministic for a given split.
 */
export class ScoreModel {
    private net: tf.Sequential | null = null;
    testError: number | null = null;

    constructor(private options: FitOptions = {}) {}

    private toTensor(texts: string[]): tf.Tensor2D {
        const rows = texts.map((t) => Array.from(featurize(t)));
        return tf.tensor2d(rows, [texts.length, FEATURE_DIM]);
    }

    async fit(pairs: Pair[], seed: number): Promise<number> {
        if (pairs.length < MIN_PAIRS) {
            throw new Error(`need at least ${MIN_PAIRS} pairs, got ${pairs.length}`);
        }
        const { train, test } = splitPairs(pairs, seed);
        const opts = { ...DEFAULTS, ...this.options };

        this.net?.dispose();
        this.net = tf.sequential({
            layers: [
                tf.layers.dense({
                    units: 1,
                    inputShape: [FEATURE_DIM],
                    kernelInitializer: "zeros",
                    biasInitializer: "zeros",
                }),
            ],
        });
        this.net.compile({
            optimizer: tf.train.adam(opts.learningRate),
            loss: "meanSquaredError",
        });

        const x = this.toTensor(train.map(([t]) => t));
        const y = tf.tensor2d(train.map(([, s]) => [s]));
        try {
            await this.net.fit(x, y, {
                epochs: opts.epochs,
                batchSize: opts.batchSize,
                shuffle: false,
                verbose: 0,
            });
        } finally {
            x.dispose();
            y.dispose();
        }

        const predictions = this.predict(test.map(([t]) => t));
        const errors = predictions.map((p, i) => Math.abs(p - test[i][1]));
        this.testError = errors.reduce((a, b) => a + b, 0) / errors.length;
        return this.testError;
    }

    predict(texts: string[]): number[] {
        if (this.net === null) {
            throw new Error("predict before fit");
        }
        if (texts.length === 0) {
            return [];
        }
        const x = this.toTensor(texts);
        try {
            const out = this.net.predict(x) as tf.Tensor;
            const values = Array.from(out.dataSync());
            out.dispose();
            return values.map(clamp01);
        } finally {
            x.dispose();
        }
    }
}
