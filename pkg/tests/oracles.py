"""Independent brute-force reference implementations used as test oracles.

Each oracle is written for clarity with plain Python loops and shares no code
with the package under test.
"""
from itertools import combinations


def sessions_literal(ts, movement, gap):
    """Line-by-line transcription of the session-labeling pseudocode.

    ``movement`` is a list of rows, each a list of movement-variable values.
    Timestamps index a hash map exactly as in the pseudocode.
    """
    mv = dict(zip(ts, movement))
    latest = None
    flag = False
    sessions = {}
    counter = 1
    for t in ts:
        sessions[t] = -1
        if t != min(ts):
            pts = max(x for x in ts if x < t)
            delta = [a - b for a, b in zip(mv[t], mv[pts])]
            if any(e > 0 for e in delta):
                latest = t
                flag = True
                sessions[t] = counter
            else:
                if flag:
                    sessions[t] = counter
                    if t - latest > gap:
                        counter = counter + 1
                        flag = False
        else:
            latest = t
    return [sessions[t] for t in ts]


def locf(samples, grid):
    """Value at each grid time = latest sample at or before it."""
    out = []
    for g in grid:
        best = None
        for t, v in samples:
            if t <= g and (best is None or t >= best[0]):
                best = (t, v)
        out.append(best[1])
    return out


def windows_bruteforce(ids, alert_rows, s_rw, s_pw):
    """``[(session, start, label)]`` by scanning every start row independently."""
    out = []
    n = len(ids)
    for start in range(n):
        sid = ids[start]
        if sid < 1:
            continue
        rows = range(start, start + s_rw + s_pw)
        if rows[-1] >= n or any(ids[r] != sid for r in rows):
            continue
        pw_rows = range(start + s_rw, start + s_rw + s_pw)
        label = 1 if any(r in alert_rows for r in pw_rows) else 0
        out.append((sid, start, label))
    return out


def confusion_counts(y_true, y_pred):
    tp = sum(1 for t, p in zip(y_true, y_pred) if t == 1 and p == 1)
    fp = sum(1 for t, p in zip(y_true, y_pred) if t == 0 and p == 1)
    fn = sum(1 for t, p in zip(y_true, y_pred) if t == 1 and p == 0)
    tn = sum(1 for t, p in zip(y_true, y_pred) if t == 0 and p == 0)
    return tp, fp, fn, tn


def macro_scores(tp, fp, fn, tn):
    """Per-class precision/recall/F1 from their definitions, 0/0 taken as 0."""

    def div(a, b):
        return a / b if b else 0.0

    p_f, r_f = div(tp, tp + fp), div(tp, tp + fn)
    p_n, r_n = div(tn, tn + fn), div(tn, tn + fp)
    f_f = div(2 * p_f * r_f, p_f + r_f)
    f_n = div(2 * p_n * r_n, p_n + r_n)
    return {"precision_f": p_f, "recall_f": r_f, "f1_f": f_f,
            "precision_n": p_n, "recall_n": r_n, "f1_n": f_n, "macro_f1": (f_f + f_n) / 2}


def diversity_pairs(windows):
    """Mean over window pairs of the mean absolute pointwise difference."""
    pairs = list(combinations(range(len(windows)), 2))
    if not pairs:
        return 0.0
    total = 0.0
    for a, b in pairs:
        wa, wb = windows[a], windows[b]
        cells = [(i, j) for i in range(len(wa)) for j in range(len(wa[0]))]
        total += sum(abs(wa[i][j] - wb[i][j]) for i, j in cells) / len(cells)
    return total / len(pairs)


def aggregate_chain(scores, algorithms, n_settings):
    """``m_jl`` means, ``b_j`` maxima and the cell winner, first index on ties."""
    m = {}
    for j in algorithms:
        for l in range(n_settings[j]):
            vals = scores[(j, l)]
            m[(j, l)] = sum(vals) / len(vals)
    b = {j: max(m[(j, l)] for l in range(n_settings[j])) for j in algorithms}
    best_alg = None
    for j in algorithms:
        if best_alg is None or b[j] > b[best_alg]:
            best_alg = j
    return m, b, b[best_alg], best_alg


def spans_overlap(a_lo, a_hi, b_lo, b_hi):
    return not (a_hi < b_lo or b_hi < a_lo)
