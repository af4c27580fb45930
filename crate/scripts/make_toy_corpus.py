#!/usr/bin/env python3
"""Generate the synthetic English-Chinese toy corpus.

Writes, under the output directory:
  corpus.jsonl     parallel sentences with POS tags and bracketed trees
  align.e2z.txt    Pharaoh links, English index first
  align.z2e.txt    Pharaoh links, Chinese index first
  gold.jsonl       the NP records the projection pipeline should produce,
                   labelled from the templates' own semantics

Every NP template states the label it stands for, so gold.jsonl does not
depend on any of the Rust labelling code.
"""

import argparse
import json
import random
from pathlib import Path

NOUNS = [
    # en singular, en plural, zh, classifier, human
    ("dog", "dogs", "狗", "只", False),
    ("cat", "cats", "猫", "只", False),
    ("book", "books", "书", "本", False),
    ("apple", "apples", "苹果", "个", False),
    ("car", "cars", "车", "辆", False),
    ("letter", "letters", "信", "封", False),
    ("teacher", "teachers", "老师", "位", True),
    ("student", "students", "学生", "个", True),
    ("child", "children", "孩子", "个", True),
    ("worker", "workers", "工人", "个", True),
]
NAMES = [("John", "约翰"), ("Mary", "玛丽"), ("Lisi", "李四"), ("Zhangsan", "张三"), ("Tom", "汤姆")]
NUMBERS = [("two", "两"), ("three", "三"), ("five", "五"), ("ten", "十")]
VERBS = [("saw", "看见"), ("liked", "喜欢"), ("found", "找到"), ("bought", "买"), ("met", "遇到"), ("helped", "帮助")]
PRONOUNS = [("he", "他"), ("she", "她"), ("they", "他们"), ("we", "我们")]
MEN_EXCLUDED = {"我们", "你们", "您们", "他们", "她们", "它们", "咱们", "哥们", "爷们", "娘们"}


class Side:
    """Tokens, tags and a bracketed tree for one language side of an NP."""

    def __init__(self, tree, leaves):
        self.tree = tree
        self.tokens = [w for w, _ in leaves]
        self.tags = [t for _, t in leaves]


def leaf(word, tag):
    return f"({tag} {word})", [(word, tag)]


def node(label, *parts):
    trees = " ".join(p[0] for p in parts)
    leaves = [lv for p in parts for lv in p[1]]
    return f"({label} {trees})", leaves


class NP:
    """A matched NP pair.

    links: (en_local, zh_local) pairs.
    survivors: list of (en_start, en_end, zh_start, zh_end, plurality,
    definiteness) in local coordinates; empty when the pair is filtered out.
    """

    def __init__(self, en, zh, links, survivors):
        self.en = Side(*en)
        self.zh = Side(*zh)
        self.links = links
        self.survivors = survivors


def whole(np_en, np_zh, plurality, definiteness):
    return [(0, len(np_en[1]), 0, len(np_zh[1]), plurality, definiteness)]


def zh_plural_noun(rng, noun):
    sg, pl, zh, cl, human = noun
    if human and rng.random() < 0.7:
        return zh + "们"
    return zh


def bare_plural(rng):
    noun = rng.choice(NOUNS)
    zh_word = zh_plural_noun(rng, noun)
    en = node("NP", leaf(noun[1], "NNS"))
    zh = node("NP", leaf(zh_word, "NN"))
    return NP(en, zh, [(0, 0)], whole(en, zh, "plural", "indefinite"))


def the_singular(rng):
    noun = rng.choice(NOUNS)
    en = node("NP", leaf("the", "DT"), leaf(noun[0], "NN"))
    zh = node("NP", leaf(noun[2], "NN"))
    return NP(en, zh, [(1, 0)], whole(en, zh, "singular", "definite"))


def the_plural(rng):
    noun = rng.choice(NOUNS)
    en = node("NP", leaf("the", "DT"), leaf(noun[1], "NNS"))
    if noun[4] and rng.random() < 0.6:
        zh = node("NP", leaf(noun[2] + "们", "NN"))
        links = [(0, 0), (1, 0)]
    else:
        zh = node("NP", leaf("这些", "DT"), leaf(noun[2], "NN"))
        links = [(0, 0), (1, 1)]
    return NP(en, zh, links, whole(en, zh, "plural", "definite"))


def a_singular(rng):
    noun = rng.choice(NOUNS)
    en = node("NP", leaf("a", "DT"), leaf(noun[0], "NN"))
    zh = node("NP", node("QP", leaf("一", "CD"), node("CLP", leaf(noun[3], "M"))), leaf(noun[2], "NN"))
    return NP(en, zh, [(0, 0), (0, 1), (1, 2)], whole(en, zh, "singular", "indefinite"))


def numeral_plural(rng):
    noun = rng.choice(NOUNS)
    num_en, num_zh = rng.choice(NUMBERS)
    en = node("NP", leaf(num_en, "CD"), leaf(noun[1], "NNS"))
    zh = node("NP", node("QP", leaf(num_zh, "CD"), node("CLP", leaf(noun[3], "M"))), leaf(noun[2], "NN"))
    return NP(en, zh, [(0, 0), (0, 1), (1, 2)], whole(en, zh, "plural", "indefinite"))


def this_singular(rng):
    noun = rng.choice(NOUNS)
    det_en, det_zh = rng.choice([("this", "这"), ("that", "那")])
    en = node("NP", leaf(det_en, "DT"), leaf(noun[0], "NN"))
    zh = node("NP", node("DP", leaf(det_zh, "DT")), node("CLP", leaf(noun[3], "M")), leaf(noun[2], "NN"))
    return NP(en, zh, [(0, 0), (0, 1), (1, 2)], whole(en, zh, "singular", "definite"))


def these_plural(rng):
    noun = rng.choice(NOUNS)
    det_en, det_zh = rng.choice([("these", "这些"), ("those", "那些")])
    en = node("NP", leaf(det_en, "DT"), leaf(noun[1], "NNS"))
    zh = node("NP", leaf(det_zh, "DT"), leaf(noun[2], "NN"))
    return NP(en, zh, [(0, 0), (1, 1)], whole(en, zh, "plural", "definite"))


def some_plural(rng):
    noun = rng.choice(NOUNS)
    q_en, q_tag, q_zh = rng.choice([("some", "DT", "一些"), ("many", "JJ", "很多")])
    en = node("NP", leaf(q_en, q_tag), leaf(noun[1], "NNS"))
    zh = node("NP", node("QP", leaf(q_zh, "CD")), leaf(noun[2], "NN"))
    return NP(en, zh, [(0, 0), (1, 1)], whole(en, zh, "plural", "indefinite"))


def proper(rng):
    en_name, zh_name = rng.choice(NAMES)
    en = node("NP", leaf(en_name, "NNP"))
    zh = node("NP", leaf(zh_name, "NR"))
    return NP(en, zh, [(0, 0)], whole(en, zh, "singular", "definite"))


def possessive(rng):
    en_name, zh_name = rng.choice(NAMES)
    noun = rng.choice(NOUNS)
    en = node("NP", node("NP", leaf(en_name, "NNP"), leaf("'s", "POS")), leaf(noun[0], "NN"))
    zh = node("NP", node("DNP", node("NP", leaf(zh_name, "NR")), leaf("的", "DEG")), node("NP", leaf(noun[2], "NN")))
    # only the maximal pair survives
    return NP(en, zh, [(0, 0), (1, 1), (2, 2)], whole(en, zh, "singular", "definite"))


def cups_of(rng):
    num_en, num_zh = rng.choice(NUMBERS)
    unit_sg, unit_pl, unit_zh, stuff_en, stuff_zh = rng.choice(
        [("cup", "cups", "杯", "coffee", "咖啡"), ("bottle", "bottles", "瓶", "water", "水"), ("piece", "pieces", "块", "cake", "蛋糕")]
    )
    en = node(
        "NP",
        node("NP", leaf(num_en, "CD"), leaf(unit_pl, "NNS")),
        node("PP", leaf("of", "IN"), node("NP", leaf(stuff_en, "NN"))),
    )
    zh = node("NP", node("QP", leaf(num_zh, "CD"), node("CLP", leaf(unit_zh, "M"))), node("NP", leaf(stuff_zh, "NN")))
    return NP(en, zh, [(0, 0), (1, 1), (3, 2)], whole(en, zh, "plural", "indefinite"))


def pronoun(rng):
    en_p, zh_p = rng.choice(PRONOUNS)
    en = node("NP", leaf(en_p, "PRP"))
    zh = node("NP", leaf(zh_p, "PN"))
    return NP(en, zh, [(0, 0)], [])


def coordination(rng):
    (a_en, a_zh), (b_en, b_zh) = rng.sample(NAMES, 2)
    en = node("NP", node("NP", leaf(a_en, "NNP")), leaf("and", "CC"), node("NP", leaf(b_en, "NNP")))
    zh = node("NP", node("NP", leaf(a_zh, "NR")), leaf("和", "CC"), node("NP", leaf(b_zh, "NR")))
    # the coordination is dropped, each conjunct stays
    survivors = [(0, 1, 0, 1, "singular", "definite"), (2, 3, 2, 3, "singular", "definite")]
    return NP(en, zh, [(0, 0), (1, 1), (2, 2)], survivors)


def collective(rng):
    # an English singular collective rendered with a 们 noun
    en = node("NP", leaf("the", "DT"), leaf(rng.choice(["class", "team"]), "NN"))
    zh = node("NP", leaf(rng.choice(["同学们", "队员们"]), "NN"))
    return NP(en, zh, [(0, 0), (1, 0)], whole(en, zh, "singular", "definite"))


SUBJECTS = [
    (proper, 4), (pronoun, 3), (the_singular, 3), (the_plural, 3), (bare_plural, 2),
    (coordination, 1), (possessive, 1), (numeral_plural, 1), (collective, 1),
]
OBJECTS = [
    (the_singular, 3), (a_singular, 4), (numeral_plural, 3), (bare_plural, 3), (this_singular, 2),
    (these_plural, 2), (some_plural, 2), (proper, 2), (possessive, 2), (cups_of, 2), (the_plural, 2),
]


def pick(rng, table):
    funcs = [f for f, _ in table]
    weights = [w for _, w in table]
    return rng.choices(funcs, weights=weights, k=1)[0]


def head(tags, start, end):
    for i in range(end - 1, start - 1, -1):
        if tags[i].startswith("N"):
            return i
    return end - 1


def sentence(rng, sent_id, doc_id, position):
    subj = pick(rng, SUBJECTS)(rng)
    obj = pick(rng, OBJECTS)(rng)
    verb_en, verb_zh = rng.choice(VERBS)
    with_le = rng.random() < 0.5

    en_tree, en_leaves = node(
        "ROOT",
        node("S", (subj.en.tree, list(zip(subj.en.tokens, subj.en.tags))),
             node("VP", leaf(verb_en, "VBD"), (obj.en.tree, list(zip(obj.en.tokens, obj.en.tags)))),
             leaf(".", ".")),
    )
    vp_zh = [leaf(verb_zh, "VV")]
    if with_le:
        vp_zh.append(leaf("了", "AS"))
    vp_zh.append((obj.zh.tree, list(zip(obj.zh.tokens, obj.zh.tags))))
    zh_tree, zh_leaves = node(
        "ROOT",
        node("IP", (subj.zh.tree, list(zip(subj.zh.tokens, subj.zh.tags))), node("VP", *vp_zh), leaf("。", "PU")),
    )

    en_s, zh_s = 0, 0
    en_v = len(subj.en.tokens)
    zh_v = len(subj.zh.tokens)
    en_o = en_v + 1
    zh_o = zh_v + (2 if with_le else 1)
    links = {(i + en_s, j + zh_s) for i, j in subj.links}
    links |= {(i + en_o, j + zh_o) for i, j in obj.links}
    links.add((en_v, zh_v))
    links.add((len(en_leaves) - 1, len(zh_leaves) - 1))

    en_tokens = [w for w, _ in en_leaves]
    en_tags = [t for _, t in en_leaves]
    zh_tokens = [w for w, _ in zh_leaves]
    zh_tags = [t for _, t in zh_leaves]
    record = {
        "id": sent_id,
        "doc_id": doc_id,
        "position": position,
        "en_tokens": en_tokens,
        "en_pos": en_tags,
        "en_tree": en_tree,
        "zh_tokens": zh_tokens,
        "zh_pos": zh_tags,
        "zh_tree": zh_tree,
    }

    gold = []
    for np_, eo, zo in ((subj, en_s, zh_s), (obj, en_o, zh_o)):
        for es, ee, zs, ze, plur, defi in np_.survivors:
            es, ee, zs, ze = es + eo, ee + eo, zs + zo, ze + zo
            zh_head = head(zh_tags, zs, ze)
            head_tok = zh_tokens[zh_head]
            tags = zh_tags[zs:ze]
            toks = zh_tokens[zs:ze]
            explicit_plural = any(t in ("CD", "M") for t in tags)
            explicit_definite = (
                "NR" in tags
                or any(
                    tags[i] == "DEG" and toks[i] == "的" and any(t == "PN" or t.startswith("N") for t in tags[:i])
                    for i in range(len(tags))
                )
                or any(
                    tags[i] in ("CD", "M")
                    and any(tags[k] == "DT" and toks[k][:1] in ("这", "那") for k in range(i))
                    for i in range(len(tags))
                )
            )
            gold.append(
                {
                    "id": f"{sent_id}:{zs}-{ze}",
                    "sent_id": sent_id,
                    "zh_span": {"start": zs, "end": ze, "head": zh_head},
                    "zh_text": " ".join(toks),
                    "en_span": {"start": es, "end": ee, "head": head(en_tags, es, ee)},
                    "en_text": " ".join(en_tokens[es:ee]),
                    "plurality": plur,
                    "definiteness": defi,
                    "explicit_plural": explicit_plural,
                    "explicit_definite": explicit_definite,
                    "men_suffix": head_tok.endswith("们") and head_tok not in MEN_EXCLUDED,
                    "split": "unsplit",
                }
            )
    return record, sorted(links), gold


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data" / "toy")
    ap.add_argument("--docs", type=int, default=24)
    ap.add_argument("--per-doc", type=int, default=10)
    ap.add_argument("--seed", type=int, default=20240611)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    corpus, e2z, z2e, gold = [], [], [], []
    for d in range(args.docs):
        for p in range(args.per_doc):
            rec, links, g = sentence(rng, f"d{d:02d}s{p:02d}", f"d{d:02d}", p)
            corpus.append(rec)
            e2z.append(" ".join(f"{i}-{j}" for i, j in links))
            z2e.append(" ".join(f"{j}-{i}" for j, i in sorted((j, i) for i, j in links)))
            gold.extend(g)
    gold.sort(key=lambda r: (r["sent_id"], r["zh_span"]["start"], r["zh_span"]["end"]))

    def dump(name, lines):
        with open(args.out / name, "w", encoding="utf-8", newline="\n") as f:
            for line in lines:
                f.write(line + "\n")

    dump("corpus.jsonl", (json.dumps(r, ensure_ascii=False, separators=(",", ":")) for r in corpus))
    dump("align.e2z.txt", e2z)
    dump("align.z2e.txt", z2e)
    dump("gold.jsonl", (json.dumps(r, ensure_ascii=False, separators=(",", ":")) for r in gold))
    print(f"{len(corpus)} pairs, {len(gold)} gold NPs -> {args.out}")


if __name__ == "__main__":
    main()
