"""Brute-force reference computations.

Plain Python loops over rows and pairs, sharing no code with the package
beyond reading cells out of a Dataset.
"""
import itertools
import math


def confusion(y_true, y_pred, positive):
    tp = fp = tn = fn = 0
    for t, p in zip(y_true, y_pred):
        if t == positive and p == positive:
            tp += 1
        elif t != positive and p == positive:
            fp += 1
        elif t != positive and p != positive:
            tn += 1
        else:
            fn += 1
    return tp, fp, tn, fn


def rates(tp, fp, tn, fn):
    def div(a, b):
        return None if b == 0 else a / b

    n = tp + fp + tn + fn
    return {
        "tpr": div(tp, tp + fn),
        "fpr": div(fp, fp + tn),
        "ppv": div(tp, tp + fp),
        "accuracy": div(tp + tn, n),
        "positive_rate": div(tp + fp, n),
    }


def groups_of(column):
    out = {}
    for i, g in enumerate(column):
        out.setdefault(g, []).append(i)
    return dict(sorted(out.items()))


def grouped(column, y_true, y_pred, positive):
    return {
        g: confusion([y_true[i] for i in idx], [y_pred[i] for i in idx], positive)
        for g, idx in groups_of(column).items()
    }


def violation_grid(values, tolerance):
    n = len(values)
    grid = [[False] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if values[i] is None or values[j] is None:
                grid[i][j] = None
            else:
                grid[i][j] = abs(values[i] - values[j]) > tolerance
    return grid


def disparate_ratio(column, y_pred, positive):
    rs = []
    for idx in groups_of(column).values():
        rs.append(sum(1 for i in idx if y_pred[i] == positive) / len(idx))
    if max(rs) == 0:
        return 1.0
    return min(rs) / max(rs)


def systemic_pairs(rows, protected_index, labels):
    out = []
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            a, b = rows[i], rows[j]
            same = all(a[k] == b[k] for k in range(len(a)) if k != protected_index)
            if same and a[protected_index] != b[protected_index] and labels[i] != labels[j]:
                out.append((i, j))
    return out


def label_gap(column, labels):
    groups = groups_of(column)
    label_set = sorted(set(labels))
    freq = {
        g: {l: sum(1 for i in idx if labels[i] == l) / len(idx) for l in label_set}
        for g, idx in groups.items()
    }
    best = 0.0
    for l in label_set:
        for g in groups:
            for h in groups:
                best = max(best, abs(freq[g][l] - freq[h][l]))
    return best


def mixed_distance(a, b, kinds, bounds):
    """kinds: 'n'/'c' per feature; bounds: (lo, hi) per numeric feature position."""
    total = 0.0
    for k, (x, y, kind) in enumerate(zip(a, b, kinds)):
        if kind == "n":
            lo, hi = bounds[k]
            if hi - lo > 0:
                total += min(abs(x - y) / (hi - lo), 1.0)
        else:
            total += 0.0 if x == y else 1.0
    return total / len(a)


def kth_neighbour_distance(query, reference, k, kinds, bounds):
    """k-th smallest distance, discounting one exact-zero match."""
    ds = sorted(mixed_distance(query, r, kinds, bounds) for r in reference)
    if ds and ds[0] == 0.0:
        ds = ds[1:]
    return ds[k - 1]


def nearest_label(query, reference, labels, kinds, bounds):
    best, best_i = math.inf, None
    for i, r in enumerate(reference):
        d = mixed_distance(query, r, kinds, bounds)
        if d < best:
            best, best_i = d, i
    return labels[best_i]


def pairs(n):
    return itertools.combinations(range(n), 2)
