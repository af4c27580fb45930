#!/usr/bin/env python3
"""Reference statistics for the toy dataset, computed without the Rust code.

Reads data/toy/corpus.jsonl and data/toy/gold.jsonl, recomputes the
Chinese-side flags from the POS tags, assigns splits with the grouped
hash procedure and writes data/toy/gold_stats.json.
"""
import argparse
import hashlib
import json
import struct
from collections import OrderedDict
from pathlib import Path

MEN_EXCLUDED = {"我们", "你们", "您们", "他们", "她们", "它们", "咱们", "哥们", "爷们", "娘们"}


def stable_hash(seed, key):
    d = hashlib.sha256(struct.pack("<Q", seed) + key.encode("utf-8")).digest()
    return struct.unpack("<Q", d[:8])[0]


def targets(n, ratios):
    s = sum(ratios)
    floors = [n * r // s for r in ratios]
    rems = [n * r % s for r in ratios]
    order = sorted(range(3), key=lambda i: (-rems[i], i))
    for i in order[: n - sum(floors)]:
        floors[i] += 1
    return floors


def assign_splits(records, ratios, seed):
    sizes = OrderedDict()
    for r in records:
        sizes[r["sent_id"]] = sizes.get(r["sent_id"], 0) + 1
    order = sorted((stable_hash(seed, sid), sid, n) for sid, n in sizes.items())
    _, dev_t, test_t = targets(len(records), ratios)
    where = {}
    for name, room in (("test", test_t), ("dev", dev_t)):
        for _, sid, n in order:
            if room == 0:
                break
            if n <= room and sid not in where:
                where[sid] = name
                room -= n
    return {sid: where.get(sid, "train") for sid in sizes}


def flags(rec, sent):
    toks, tags = sent["zh_tokens"], sent["zh_pos"]
    s, e, h = rec["zh_span"]["start"], rec["zh_span"]["end"], rec["zh_span"]["head"]
    plural = any(t in ("CD", "M") for t in tags[s:e])
    definite = "NR" in tags[s:e]
    for i in range(s, e):
        before = range(s, i)
        if tags[i] == "DEG" and toks[i] == "的" and any(tags[k] == "PN" or tags[k].startswith("N") for k in before):
            definite = True
        if tags[i] in ("CD", "M") and any(tags[k] == "DT" and toks[k][:1] in ("这", "那") for k in before):
            definite = True
    men = toks[h].endswith("们") and toks[h] not in MEN_EXCLUDED
    return plural, definite, men


def rate(a, b):
    return a / b if b else None


def counts(recs):
    n = len(recs)
    sg = sum(r["plurality"] == "singular" for r in recs)
    df = sum(r["definiteness"] == "definite" for r in recs)
    return {
        "total": n,
        "singular": sg,
        "plural": n - sg,
        "definite": df,
        "indefinite": n - df,
        "singular_rate": rate(sg, n),
        "plural_rate": rate(n - sg, n),
        "definite_rate": rate(df, n),
        "indefinite_rate": rate(n - df, n),
    }


def main():
    root = Path(__file__).resolve().parent.parent / "data" / "toy"
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dir", type=Path, default=root)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    corpus = {}
    with open(args.dir / "corpus.jsonl", encoding="utf-8") as f:
        for line in f:
            s = json.loads(line)
            corpus[s["id"]] = s
    with open(args.dir / "gold.jsonl", encoding="utf-8") as f:
        recs = [json.loads(line) for line in f]

    split = assign_splits(recs, (8, 1, 1), args.seed)
    by_sent = {}
    ep = ed = 0
    men = []
    for r in recs:
        p, d, m = flags(r, corpus[r["sent_id"]])
        ep += p
        ed += d
        if m:
            men.append(r)
        sp, sd = by_sent.get(r["sent_id"], (False, False))
        by_sent[r["sent_id"]] = (sp or p, sd or d)

    out = {
        "seed": args.seed,
        "total": len(recs),
        "splits": {k: counts([r for r in recs if split[r["sent_id"]] == k]) for k in ("train", "dev", "test")},
        "overall": counts(recs),
        "explicit_plural_count": ep,
        "explicit_definite_count": ed,
        "sentences": len(by_sent),
        "sentence_explicit_plural": sum(v[0] for v in by_sent.values()),
        "sentence_explicit_definite": sum(v[1] for v in by_sent.values()),
        "men_count": len(men),
        "men_singular": sum(r["plurality"] == "singular" for r in men),
        "men_indefinite": sum(r["definiteness"] == "indefinite" for r in men),
        "split_of_sentence": dict(sorted(split.items())),
    }
    with open(args.dir / "gold_stats.json", "w", encoding="utf-8") as f:
        json.dump(out, f, ensure_ascii=False, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
