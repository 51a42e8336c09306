#!/usr/bin/env python3
"""Generates assets/mini_corpus.csv, the bundled evaluation corpus.

2000 synthetic vulnerability records with class-indicative keyword fragments
per CVSS metric, realistic class imbalance, and rare classes planted into
every fifth of the timeline so each time fold holds at least four records of
every class of every metric. Deterministic for a fixed seed; the generated
file is checked in, so running this script is only needed to regenerate it.
"""

import argparse
import datetime
import random

N_RECORDS = 2000
N_FOLDS = 5
PLANT_PER_FOLD = 4  # records per (fold, metric, class)

# Chance a record's description mentions its class, by the class's rank in
# the metric's prior (dominant, middle, rarest). Rare labels are nearly
# always spelled out while the default case often goes unstated, so the
# under-represented classes carry a clean, amplifiable signal.
FRAGMENT_PROB_BY_RANK = [0.62, 0.80, 0.92]
MISLEAD_PROB = 0.10   # chance it also mentions a wrong class of the metric

METRICS = [
    "access_vector", "access_complexity", "authentication",
    "confidentiality", "integrity", "availability", "severity",
]

CLASS_NAMES = {
    "access_vector": ["Local", "AdjacentNetwork", "Network"],
    "access_complexity": ["High", "Medium", "Low"],
    "authentication": ["Multiple", "Single", "None"],
    "confidentiality": ["None", "Partial", "Complete"],
    "integrity": ["None", "Partial", "Complete"],
    "availability": ["None", "Partial", "Complete"],
    "severity": ["Low", "Medium", "High"],
}

# Class priors shaped like public vulnerability data: one dominant class per
# metric and at least one rare class.
CLASS_WEIGHTS = {
    "access_vector": [0.08, 0.01, 0.91],
    "access_complexity": [0.09, 0.20, 0.71],
    "authentication": [0.005, 0.065, 0.93],
    "confidentiality": [0.09, 0.71, 0.20],
    "integrity": [0.08, 0.72, 0.20],
    "availability": [0.09, 0.71, 0.20],
    "severity": [0.09, 0.70, 0.21],
}

# Keyword fragments per class. Within a metric the fragments of different
# classes share no content-word stems, so the planted signal stays separable.
FRAGMENTS = {
    "access_vector": [
        ["local console shell foothold", "physically connected terminal hijack",
         "filesystem symlink race locally", "workstation seat misuse"],
        ["adjacent wireless lan segment", "link layer neighbor discovery",
         "bluetooth pairing radius", "same broadcast domain flooding"],
        ["remote crafted packet barrage", "crafted http request train",
         "remote tcp handshake trickery", "internet facing listener probe"],
    ],
    "access_complexity": [
        ["demands improbable timing alignment", "complex multistage preparation chain",
         "narrow dispatch window conjunction", "contrived configuration prerequisites"],
        ["measured victim participation needed", "victim must view a lure attachment",
         "loosely constrained staging effort", "middling social engineering persuasion"],
        ["trivially automated exploitation", "straightforward instant trigger",
         "easily scripted takeover recipe", "effortless drive by activation"],
    ],
    "authentication": [
        ["two separate credential checkpoints", "dual approval gates stacked",
         "tandem passcode prompt hurdles", "twofold signin ladder"],
        ["a valid account token presented", "authenticated operator identity check",
         "one verified user profile", "post login parameter fiddling"],
        ["anonymous reachability suffices", "unauthenticated endpoint exposure",
         "guest grade admittance allowed", "open preauth code path"],
    ],
    "confidentiality": [
        ["secrecy unaffected entirely", "confidential records stay protected",
         "privacy impact absent", "keeps secrets intact"],
        ["leaks fragmentary memory snippets", "discloses limited manifest data",
         "partial information seepage", "reads selected files only"],
        ["dumps the whole password database", "wholesale address space disclosure",
         "copies arbitrary documents freely", "complete disclosure catastrophe"],
    ],
    "integrity": [
        ["ledger fidelity preserved", "stored entries untouched",
         "write attempts remain blocked", "no mutation primitive exists"],
        ["alters isolated settings sparingly", "partial row tampering",
         "modifies certain registry values", "scattered tuple corruption"],
        ["unrestricted blob overwrite", "full datastore rewrite",
         "outright payload forgery", "clobbers any saved object"],
    ],
    "availability": [
        ["uptime unharmed throughout", "downtime never materializes",
         "responsiveness unchanged overall", "zero outage introduced"],
        ["intermittent worker thread stalls", "sporadic throughput dips",
         "temporary slowdown bursts", "partial degradation episodes"],
        ["total daemon crash loop", "kernel panic halts the host",
         "permanent hang until reboot", "unrecoverable shutdown forced"],
    ],
    "severity": [
        ["minor nuisance footprint", "negligible fallout expected",
         "cosmetic blemish only", "harmless edge behavior"],
        ["moderate risk rating", "noticeable but bounded damage",
         "intermediate risk classification", "tempered threat appraisal"],
        ["critical fleet wide compromise", "emergency patch urgency",
         "severe weaponization consequences", "devastating compromise potential"],
    ],
}

PRODUCTS = [
    "webmail gateway", "archive parser", "session broker", "printing spooler",
    "media transcoder", "sql connector", "firmware updater",
    "message queue", "search indexer", "telemetry agent", "license manager",
    "backup scheduler", "report renderer", "directory browser",
    "update fetcher", "log shipper",
]

GLUE = [
    "contains a flaw where", "mishandles boundary conditions when",
    "improperly parses input while", "exhibits an issue in which",
    "fails to sanitize fields before", "ships a regression so that",
]

TAILS = [
    "as reported during routine review", "per the vendor advisory",
    "according to the upstream changelog",
    'noted in the "quarterly" security bulletin',
]


def weighted_class(rng, weights):
    x = rng.random()
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if x < acc:
            return i
    return len(weights) - 1


def build_labels(rng):
    """Sampled labels plus per-fold plants for every (metric, class)."""
    labels = [
        {m: weighted_class(rng, CLASS_WEIGHTS[m]) for m in METRICS}
        for _ in range(N_RECORDS)
    ]
    block = N_RECORDS // N_FOLDS
    for fold in range(N_FOLDS):
        base = fold * block
        for m in METRICS:
            slots = rng.sample(range(block), PLANT_PER_FOLD * 3)
            for cls in range(3):
                for s in slots[cls * PLANT_PER_FOLD:(cls + 1) * PLANT_PER_FOLD]:
                    labels[base + s][m] = cls
    return labels


def fragment_prob(metric, cls):
    rank = sorted(range(3), key=lambda c: CLASS_WEIGHTS[metric][c],
                  reverse=True).index(cls)
    return FRAGMENT_PROB_BY_RANK[rank]


def build_description(rng, record_labels):
    fragments = []
    for m in METRICS:
        cls = record_labels[m]
        if rng.random() < fragment_prob(m, cls):
            fragments.append(rng.choice(FRAGMENTS[m][cls]))
        if rng.random() < MISLEAD_PROB:
            wrong = rng.choice([c for c in range(3) if c != cls])
            fragments.append(rng.choice(FRAGMENTS[m][wrong]))
    rng.shuffle(fragments)
    if not fragments:
        fragments = ["an unspecified anomaly"]
    head = f"The {rng.choice(PRODUCTS)} {rng.choice(GLUE)}"
    return f"{head} {', '.join(fragments)}, {rng.choice(TAILS)}."


def csv_quote(text):
    return '"' + text.replace('"', '""') + '"'


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="assets/mini_corpus.csv")
    ap.add_argument("--seed", type=int, default=20240611)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    labels = build_labels(rng)

    rows = []
    epoch = datetime.datetime(1999, 6, 1, tzinfo=datetime.timezone.utc)
    t = epoch
    for i in range(N_RECORDS):
        t += datetime.timedelta(minutes=rng.randrange(240, 960))
        desc = build_description(rng, labels[i])
        row = [
            f"CVE-{t.year}-{10000 + i}",
            t.strftime("%Y-%m-%dT%H:%M:%SZ"),
        ]
        row += [CLASS_NAMES[m][labels[i][m]] for m in METRICS]
        row.append(csv_quote(desc))
        rows.append(",".join(row))

    header = ("id,published,access_vector,access_complexity,authentication,"
              "confidentiality,integrity,availability,severity,description")
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        fh.write("\n".join(rows) + "\n")

    block = N_RECORDS // N_FOLDS
    for m in METRICS:
        counts = [0, 0, 0]
        for rec in labels:
            counts[rec[m]] += 1
        per_fold_min = min(
            sum(1 for rec in labels[f * block:(f + 1) * block] if rec[m] == c)
            for f in range(N_FOLDS) for c in range(3)
        )
        print(f"{m}: totals={counts} min-per-fold-class={per_fold_min}")


if __name__ == "__main__":
    main()
