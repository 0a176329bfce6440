export const FEATURE_DIM = 1024;

function tokenize(text: string): string[] {
    return text
        .toLowerCase()
        .split(/[^a-z0-9_]+/)
        .filter((t) => t.length > 0);
}

// FNV-1a, 32 bit
function hash(s: string): number {
    let h = 0x811c9dc5;
    for (let i = 0; i < s.length; i++) {
        h ^= s.charCodeAt(i);
        h = Math.imul(h, 0x01000193);
    }
    return h >>> 0;
}

/** Hashed unigram+bigram counts, L1-normalized. */
export function featurize(text: string): Float32Array {
    const vec = new Float32Array(FEATURE_DIM);
    const tokens = tokenize(text);
    let total = 0;
    for (let i = 0; i < tokens.length; i++) {
        vec[hash(tokens[i]) % FEATURE_DIM] += 1;
        total += 1;
        if (i + 1 < tokens.length) {
            vec[hash(tokens[i] + " " + tokens[i + 1]) % FEATURE_DIM] += 1;
            total += 1;
        }
    }
    if (total > 0) {
        for (let j = 0; j < FEATURE_DIM; j++) {
            vec[j] /= total;
        }
    }
    return vec;
}
