#!/usr/bin/env python3
"""Trains a tiny byte-level BPE merge list on the fixture corpus.

Writes encoder.json and vocab.bpe in the GPT-2 file layout so tests can load
an exact tokenizer without the real 50k vocabulary.
"""
import collections
import json
import pathlib
import re
import sys

PRETOKEN = re.compile(r"""'s|'t|'re|'ve|'m|'ll|'d| ?[A-Za-z]+| ?[0-9]+| ?[^\sA-Za-z0-9]+|\s+(?!\S)|\s+""")


def byte_symbols():
    keep = list(range(ord("!"), ord("~") + 1)) + list(range(0xA1, 0xAD)) + list(range(0xAE, 0x100))
    table, extra = {}, 0
    for b in range(256):
        if b in keep:
            table[b] = chr(b)
        else:
            table[b] = chr(256 + extra)
            extra += 1
    return table


def main():
    root = pathlib.Path(__file__).resolve().parents[1]
    out = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else root / "tests/fixtures/bpe"
    n_merges = int(sys.argv[2]) if len(sys.argv) > 2 else 120
    table = byte_symbols()
    text = "".join(p.read_text(encoding="utf-8") for p in sorted((root / "tests/fixtures/corpus").rglob("*.java")))
    words = collections.Counter(tuple(table[b] for b in w.encode("utf-8")) for w in PRETOKEN.findall(text))
    merges = []
    for _ in range(n_merges):
        pairs = collections.Counter()
        for w, c in words.items():
            for a, b in zip(w, w[1:]):
                pairs[(a, b)] += c
        if not pairs:
            break
        best = max(sorted(pairs), key=lambda p: pairs[p])
        merges.append(best)
        merged = collections.Counter()
        for w, c in words.items():
            i, nw = 0, []
            while i < len(w):
                if i + 1 < len(w) and (w[i], w[i + 1]) == best:
                    nw.append(w[i] + w[i + 1])
                    i += 2
                else:
                    nw.append(w[i])
                    i += 1
            merged[tuple(nw)] += c
        words = merged
    vocab = {table[b]: b for b in range(256)}
    for a, b in merges:
        vocab.setdefault(a + b, len(vocab))
    out.mkdir(parents=True, exist_ok=True)
    (out / "encoder.json").write_text(json.dumps(vocab, ensure_ascii=False), encoding="utf-8")
    (out / "vocab.bpe").write_text("#version: 0.2\n" + "".join(f"{a} {b}\n" for a, b in merges), encoding="utf-8")


if __name__ == "__main__":
    main()
