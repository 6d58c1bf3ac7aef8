"""Independent brute-force reference implementations used by the tests.

These deliberately re-derive results with direct enumeration (no shared
counting, search, or ranking code with the package) so they can act as
oracles for the efficient implementations.
"""

import math

EOS = "</s>"
WILDCARD = "__"


# ---------------------------------------------------------------------------
# template mining
# ---------------------------------------------------------------------------


def oracle_mine_and_rank(clusters, min_cluster_support=10, min_cooccur=5,
                         max_arg=6):
    """Enumerate every (template, template, argument) triple directly."""

    def abstractions(q):
        out = {(tuple(q), ())}
        for i in range(len(q)):
            for j in range(i + 1, len(q) + 1):
                if j - i > max_arg:
                    continue
                out.add((q[:i] + (WILDCARD,) + q[j:], q[i:j]))
        return out

    cluster_items = []
    for cluster in clusters:
        items = set()
        for q in cluster:
            items |= abstractions(tuple(q))
        cluster_items.append(items)

    templates = set()
    for items in cluster_items:
        templates |= {t for t, _ in items}
    support = {}
    for t in templates:
        support[t] = sum(
            1 for items in cluster_items if any(t2 == t for t2, _ in items))
    kept = sorted(t for t in templates if support[t] >= min_cluster_support)

    pairs = {}
    for s in kept:
        for t in kept:
            if s == t:
                continue
            count = 0
            for items in cluster_items:
                args_s = {a for t2, a in items if t2 == s}
                args_t = {a for t2, a in items if t2 == t}
                if args_s & args_t:
                    count += 1
            if count > min_cooccur:
                pairs[(s, t)] = count

    N = len(clusters)
    ranked = [
        (s, t, math.log(N * c / (support[s] * support[t])), c)
        for (s, t), c in pairs.items()
    ]
    ranked.sort(key=lambda r: (-r[2], -r[3], r[0], r[1]))
    return ranked


# ---------------------------------------------------------------------------
# fused decoding
# ---------------------------------------------------------------------------


def oracle_enumerate_decode(pivots, back_model, vocab, max_len):
    """Score every possible output sequence directly.

    Sequences shorter than max_len terminate via the end symbol (its
    probability included); sequences of exactly max_len terminate by
    truncation.  Returns (tokens, logprob) sorted the same way the
    decoder sorts.
    """
    results = []

    def fused(prefix):
        d = {}
        for seq, w in pivots.pivots:
            for tok, p in back_model.next_dist(seq, prefix).items():
                d[tok] = d.get(tok, 0.0) + w * p
        return d

    def grow(prefix, logp):
        if len(prefix) == max_len:
            results.append((prefix, logp))
            return
        dist = fused(prefix)
        if prefix:
            p_eos = dist.get(EOS, 0.0)
            if p_eos > 0.0:
                results.append((prefix, logp + math.log(p_eos)))
        for tok in vocab:
            p = dist.get(tok, 0.0)
            if p > 0.0:
                grow(prefix + (tok,), logp + math.log(p))

    grow((), 0.0)
    results.sort(key=lambda h: (-h[1], h[0]))
    return results


# ---------------------------------------------------------------------------
# edit rate with block shifts
# ---------------------------------------------------------------------------


def levenshtein(a, b):
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, start=1):
        cur = [i]
        for j, y in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1,
                           prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


def all_single_shifts(seq):
    """Every sequence reachable by moving one contiguous block."""
    seen = set()
    n = len(seq)
    for i in range(n):
        for length in range(1, n - i + 1):
            block = seq[i:i + length]
            rest = seq[:i] + seq[i + length:]
            for j in range(len(rest) + 1):
                if j == i:
                    continue
                moved = rest[:j] + block + rest[j:]
                if moved != seq:
                    seen.add(moved)
    return seen


def oracle_min_edits_with_shifts(candidate, reference, max_shifts=4):
    """Minimum (#shifts + edit distance) over all shift sequences."""
    best = levenshtein(candidate, reference)
    frontier = {tuple(candidate)}
    visited = {tuple(candidate)}
    for k in range(1, max_shifts + 1):
        nxt = set()
        for seq in frontier:
            for moved in all_single_shifts(seq):
                if moved not in visited:
                    visited.add(moved)
                    nxt.add(moved)
        if not nxt:
            break
        for seq in nxt:
            best = min(best, k + levenshtein(seq, reference))
        frontier = nxt
    return best
