"""NumPy fallback for the compiled kernels.

Same functions, same arguments, same results as ``_ckernels``; the batch
routines vectorize across words instead of looping in C.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO_M53 = 1.0 / 9007199254740992.0

STAT_INVERSIONS = 0
STAT_DESCENTS = 1

_BATCH_CELLS = 1 << 21


def mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def uniforms(key: int, offset: int, count: int) -> np.ndarray:
    idx = np.arange(count, dtype=np.uint64) + np.uint64(offset + 1)
    with np.errstate(over="ignore"):
        raw = mix64(np.uint64(key) + GOLDEN * idx)
    return (raw >> np.uint64(11)).astype(np.float64) * _TWO_M53


def draw_letters(key: int, offset: int, count: int, thresholds) -> np.ndarray:
    u = uniforms(key, offset, count)
    thr = np.asarray(thresholds, dtype=np.float64)
    return np.searchsorted(thr, u, side="right").astype(np.int64) + 1


def _batch_permutations(letters: np.ndarray) -> np.ndarray:
    """Rows of letters -> rows of one-line permutations (1-based)."""
    rows, n = letters.shape
    cards = np.broadcast_to(np.arange(n, dtype=np.int64), (rows, n))
    tie = np.where(letters % 2 == 1, cards, -cards)
    order = np.lexsort((tie, letters), axis=-1)
    return order.astype(np.int64) + 1


def shelf_permutation(letters, m: int) -> np.ndarray:
    letters = np.asarray(letters, dtype=np.int64)
    if letters.size == 0:
        return letters.copy()
    return _batch_permutations(letters[None, :])[0]


def _fenwick_rows(perms: np.ndarray) -> np.ndarray:
    """Inversion counts of each row, Fenwick tree vectorized across rows."""
    rows, n = perms.shape
    tree = np.zeros((rows, n + 1), dtype=np.int64)
    total = np.zeros(rows, dtype=np.int64)
    ar = np.arange(rows)
    for i in range(n - 1, -1, -1):
        j = perms[:, i] - 1
        while True:
            live = j > 0
            if not live.any():
                break
            total[live] += tree[ar[live], j[live]]
            j = np.where(live, j - (j & -j), 0)
        j = perms[:, i].copy()
        while True:
            live = j <= n
            if not live.any():
                break
            tree[ar[live], j[live]] += 1
            j = np.where(live, j + (j & -j), n + 1)
    return total


def count_inversions(perm) -> int:
    perm = np.asarray(perm, dtype=np.int64)
    n = perm.size
    if n < 2:
        return 0
    # bottom-up merge count, one vectorized pass per level; padding with
    # increasing values past n adds no inversions
    size = 1 << (n - 1).bit_length()
    arr = np.concatenate([perm, np.arange(n + 1, size + 1, dtype=np.int64)])
    total = 0
    width = 1
    while width < size:
        blocks = arr.reshape(-1, 2 * width)
        offset = (np.arange(blocks.shape[0], dtype=np.int64) * (size + 1))[:, None]
        left = (blocks[:, :width] + offset).ravel()
        right = (blocks[:, width:] + offset).ravel()
        ends = np.repeat(np.arange(1, blocks.shape[0] + 1, dtype=np.int64) * width, width)
        total += int((ends - np.searchsorted(left, right, side="right")).sum())
        arr = np.sort(blocks, axis=1).ravel()
        width *= 2
    return total


def _pile_counts(letters: np.ndarray, piles: int) -> np.ndarray:
    rows = letters.shape[0]
    flat = (letters - 1) + piles * np.arange(rows, dtype=np.int64)[:, None]
    return np.bincount(flat.ravel(), minlength=rows * piles).reshape(rows, piles)


def _decompose_rows(perms: np.ndarray, letters: np.ndarray, m: int):
    """Columns (d, E, C, B, nonempty_even) for each row."""
    rows, n = perms.shape
    piles = 2 * m
    counts = _pile_counts(letters, piles)
    falls = perms[:, 1:] < perms[:, :-1]
    d = falls.sum(axis=1)
    even = counts[:, 1::2]
    b = even.sum(axis=1)
    ne = (even > 0).sum(axis=1)
    e = b - ne
    # boundary i sits between positions i and i+1 (0-based); a nonempty
    # block starting at offset s > 0 marks boundary s-1
    starts = np.cumsum(counts, axis=1) - counts
    marks = (counts > 0) & (starts > 0)
    boundary = np.zeros((rows, max(n - 1, 0)), dtype=bool)
    r_idx, k_idx = np.nonzero(marks)
    if n > 1:
        boundary[r_idx, starts[r_idx, k_idx] - 1] = True
    c = (falls & boundary).sum(axis=1)
    return np.stack([d, e, c, b, ne], axis=1).astype(np.int64)


def descent_parts(letters, m: int):
    letters = np.asarray(letters, dtype=np.int64)[None, :]
    if letters.shape[1] == 0:
        return 0, 0, 0, 0, 0
    perms = _batch_permutations(letters)
    return tuple(int(v) for v in _decompose_rows(perms, letters, m)[0])


def mc_chunk(key: int, n: int, m: int, thresholds, samples: int, stat: int):
    size = n * (n - 1) // 2 + 1 if stat == STAT_INVERSIONS else n
    hist = np.zeros(size, dtype=np.int64)
    max_dev = 0
    violations = 0
    batch = max(1, _BATCH_CELLS // max(n, 1))
    done = 0
    while done < samples:
        rows = min(batch, samples - done)
        letters = draw_letters(key, done * n, rows * n, thresholds).reshape(rows, n)
        perms = _batch_permutations(letters)
        if stat == STAT_INVERSIONS:
            values = _fenwick_rows(perms)
        else:
            parts = _decompose_rows(perms, letters, m)
            values = parts[:, 0]
            dev = np.abs(parts[:, 0] - parts[:, 3])
            max_dev = max(max_dev, int(dev.max()))
            bad = (
                (parts[:, 0] != parts[:, 1] + parts[:, 2])
                | (dev > 4 * m - 1)
                | (parts[:, 2] > 2 * m - 1)
            )
            violations += int(bad.sum())
        hist += np.bincount(values, minlength=size)[:size]
        done += rows
    return hist, max_dev, violations


def _words_from_indices(idx: np.ndarray, n: int, piles: int) -> np.ndarray:
    digits = np.empty((idx.size, n), dtype=np.int64)
    rem = idx.copy()
    for j in range(n - 1, -1, -1):
        digits[:, j] = rem % piles + 1
        rem //= piles
    return digits


def enumerate_chunk(n: int, m: int, start: int, stop: int):
    piles = 2 * m
    top = n * (n - 1) // 2 + 1
    width = top + n + 1
    names = ("inversions", "pair_sum", "descents", "even_cards", "pair_order", "equal_even",
             "inverse_descents")
    hists = {name: np.zeros(width, dtype=np.int64) for name in names}
    sum_ac = 0
    violations = 0
    batch = max(1, _BATCH_CELLS // max(n * n, 1))
    upper = np.triu(np.ones((n, n), dtype=bool), k=1)
    for lo in range(start, stop, batch):
        idx = np.arange(lo, min(lo + batch, stop), dtype=np.int64)
        letters = _words_from_indices(idx, n, piles)
        perms = _batch_permutations(letters)
        inv = ((perms[:, :, None] > perms[:, None, :]) & upper).sum(axis=(1, 2))
        gt = (letters[:, :, None] > letters[:, None, :]) & upper
        same_even = (
            (letters[:, :, None] == letters[:, None, :])
            & (letters[:, :, None] % 2 == 0)
            & upper
        )
        a = gt.sum(axis=(1, 2))
        c = same_even.sum(axis=(1, 2))
        parts = _decompose_rows(perms, letters, m)
        positions = np.argsort(perms, axis=1)
        ides = (positions[:, 1:] < positions[:, :-1]).sum(axis=1)
        for name, values in (
            ("inverse_descents", ides),
            ("inversions", inv),
            ("pair_sum", a + c),
            ("descents", parts[:, 0]),
            ("even_cards", parts[:, 3]),
            ("pair_order", a),
            ("equal_even", c),
        ):
            hists[name] += np.bincount(values, minlength=width)[:width]
        sum_ac += int((a * c).sum())
        bad = (
            (inv != a + c)
            | (parts[:, 0] != parts[:, 1] + parts[:, 2])
            | (parts[:, 2] > piles - 1)
            | (parts[:, 4] > m)
            | (np.abs(parts[:, 0] - parts[:, 3]) > 4 * m - 1)
        )
        violations += int(bad.sum())
    out = dict(hists)
    out["sum_ac"] = sum_ac
    out["violations"] = violations
    return out
