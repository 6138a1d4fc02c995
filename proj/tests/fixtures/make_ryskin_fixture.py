"""Generates data/ryskin21.json and data/ryskin21_mock_lm.json.

Prints per-condition A/B means computed by a direct-sum KL oracle for the
counterpart candidate sets, over a small lambda grid.
"""
import json
import math
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[2]

# (context, {condition: (word, logprob_nats, cosine_to_control)})
GROUPS = [
    ("The storyteller could turn any incident into an amusing",
     {"Control": ("anecdote", -1.2, 1.0), "Syntactic": ("anecdotes", -3.4, 0.985),
      "Recoverable": ("antidote", -4.6, 0.72), "Semantic": ("hearse", -5.5, 0.08)}),
    ("After the long hike she drank a tall glass of cold",
     {"Control": ("water", -0.9, 1.0), "Syntactic": ("waters", -3.6, 0.98),
      "Recoverable": ("wafer", -5.0, 0.70), "Semantic": ("gravel", -5.8, 0.10)}),
    ("The pianist bowed politely before the applauding",
     {"Control": ("audience", -1.0, 1.0), "Syntactic": ("audiences", -3.2, 0.985),
      "Recoverable": ("audition", -4.8, 0.68), "Semantic": ("spinach", -6.0, 0.06)}),
]
CONDITIONS = ["Control", "Semantic", "Syntactic", "Recoverable"]
# Orderings plus brackets on A[Syntactic] and the Syntactic/Recoverable B gap,
# which hold on the default grid only at lambda = 1 (gamma 8, 9, 10).
PATTERN = [
    "A[Semantic] > A[Recoverable]",
    "A[Recoverable] > A[Syntactic]",
    "A[Syntactic] > A[Control]",
    "B[Syntactic] > B[Recoverable]",
    "B[Recoverable] > B[Semantic]",
    "|B[Semantic] - B[Control]| < 0.5",
    "A[Syntactic] > 0.08",
    "A[Syntactic] < 0.1",
    "B[Syntactic] - B[Recoverable] > 0.4",
]
PUNCT = "."


def dl(a, b):
    """Unrestricted Damerau-Levenshtein (Lowrance-Wagner)."""
    inf = len(a) + len(b)
    da = {}
    d = [[inf] * (len(b) + 2) for _ in range(len(a) + 2)]
    for i in range(len(a) + 1):
        d[i + 1][0] = inf
        d[i + 1][1] = i
    for j in range(len(b) + 1):
        d[0][j + 1] = inf
        d[1][j + 1] = j
    for i in range(1, len(a) + 1):
        db = 0
        for j in range(1, len(b) + 1):
            i1 = da.get(b[j - 1], 0)
            j1 = db
            cost = 0 if a[i - 1] == b[j - 1] else 1
            if cost == 0:
                db = j
            d[i + 1][j + 1] = min(d[i][j] + cost, d[i + 1][j] + 1, d[i][j + 1] + 1,
                                  d[i1][j1] + (i - i1 - 1) + 1 + (j - j1 - 1))
        da[a[i - 1]] = i
    return d[len(a) + 1][len(b) + 1]


def vectors():
    """Control word on axis 0; each competitor in the plane of axis 0 and its own axis."""
    dim = 1 + sum(len(g[1]) for g in GROUPS)
    out = {}
    axis = 1
    for _, conds in GROUPS:
        for cond, (word, _, cos) in conds.items():
            v = [0.0] * dim
            v[0] = cos
            if cond != "Control":
                v[axis] = math.sqrt(max(0.0, 1.0 - cos * cos))
                axis += 1
            out[word] = [round(x, 6) for x in v]
    for word in lexicon_words():
        if word not in out:
            rng = random.Random(word)
            out[word] = [round(rng.uniform(-1.0, 1.0), 6) for _ in range(dim)]
    return out


def lexicon_words():
    path = ROOT / "data" / "lexicon_sample.tsv"
    words = []
    for line in path.read_text().splitlines():
        if line and not line.startswith("#"):
            words.append(line.split("\t")[0])
    return words


def cos_dist(u, v):
    dot = sum(a * b for a, b in zip(u, v))
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    return min(2.0, max(0.0, 1.0 - dot / (nu * nv)))


def decompose(priors, dists, lam):
    m = max(priors)
    z0 = sum(math.exp(p - m) for p in priors)
    p0 = [math.exp(p - m) / z0 for p in priors]
    w = [p * math.exp(-lam * d) for p, d in zip(p0, dists)]
    z = sum(w)
    q = [x / z for x in w]
    kl = sum(qi * math.log(qi / pi) for qi, pi in zip(q, p0) if qi > 0)
    ver = -math.log(p0[0])
    return kl, ver - kl, ver


def condition_means(lam, gamma, vecs):
    acc = {c: [] for c in CONDITIONS}
    for context, conds in GROUPS:
        ctrl_word, ctrl_lp, _ = conds["Control"]
        for cond in CONDITIONS:
            word, lp, _ = conds[cond]
            if cond == "Control":
                others = [conds[c] for c in CONDITIONS if c != "Control"]
            else:
                others = [conds["Control"]]
            priors = [lp] + [o[1] for o in others]
            dists = [0.0] + [dl(o[0] + PUNCT, word + PUNCT) + gamma * cos_dist(vecs[o[0]], vecs[word])
                             for o in others]
            acc[cond].append(decompose(priors, dists, lam))
    return {c: tuple(sum(v[k] for v in acc[c]) / len(acc[c]) for k in range(3)) for c in CONDITIONS}


def write_fixture(vecs):
    stimuli = []
    conditional = {}
    for g, (context, conds) in enumerate(GROUPS, start=1):
        conditional[context] = {}
        for cond in CONDITIONS:
            word, lp, _ = conds[cond]
            item = {
                "experiment_id": "Ryskin-21",
                "item_id": f"r{g:02d}-{cond.lower()}",
                "condition": cond,
                "context": context,
                "continuation": word + PUNCT,
                "target": word + PUNCT,
                "is_control": cond == "Control",
            }
            if cond != "Control":
                item["control_item_id"] = f"r{g:02d}-control"
            stimuli.append(item)
            conditional[context][word + PUNCT] = lp
    return stimuli, {"conditional": conditional, "embeddings": vecs, "floor_logprob": -20.0}


def main():
    vecs = vectors()
    if sys.argv[1:] == ["--write"]:
        stimuli, table = write_fixture(vecs)
        dataset = {"name": "Ryskin-21", "lambda": 1.0, "gamma": 8.0, "expected_pattern": PATTERN,
                   "stimuli": stimuli}
        (ROOT / "data" / "ryskin21.json").write_text(json.dumps(dataset, indent=2) + "\n")
        (ROOT / "data" / "ryskin21_mock_lm.json").write_text(json.dumps(table, indent=2) + "\n")
        means = condition_means(1.0, 8.0, vecs)
        expected = {"lambda": 1.0, "gamma": 8.0,
                    "conditions": {c: {"A": a, "B": b, "V": v} for c, (a, b, v) in means.items()}}
        (ROOT / "tests" / "fixtures" / "ryskin21_expected.json").write_text(json.dumps(expected, indent=2) + "\n")
        return
    for lam in [float(x) for x in sys.argv[1:]] or [0.5, 0.9, 0.95, 1.0, 1.05, 1.1, 1.5]:
        means = condition_means(lam, 8.0, vecs)
        row = "  ".join(f"{c[:4]} A={means[c][0]:.4f} B={means[c][1]:.4f}" for c in CONDITIONS)
        print(f"lambda={lam:<5} {row}")


if __name__ == "__main__":
    main()
