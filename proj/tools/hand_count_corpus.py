#!/usr/bin/env python3
"""Spreadsheet-style hand count of the fixture corpus statistics.

Method line spans and caller counts below were entered by reading the
fixture sources; tokens are counted with a re-statement of the fallback
rule (identifier/number runs are one token, every other non-space character
is one token). Writes tests/golden/corpus_stats.json.
"""
import json
import pathlib
import re

# (file, method, first line, last line, callers) -- callers counts every
# method holding a call with the same name and argument count, self calls
# excluded.
TABLE = [
    ("src/app/Cache.java", "get", 10, 12, 3),         # lookup; render and join via list.get(i)
    ("src/app/Cache.java", "put", 14, 16, 1),         # lookup
    ("src/app/Cache.java", "clear", 18, 20, 0),
    ("src/app/Index.java", "insert", 11, 16, 1),      # loadIndex
    ("src/app/Index.java", "lookup", 18, 32, 1),      # run
    ("src/app/Index.java", "contains", 34, 36, 2),    # run; escape via cell.contains
    ("src/app/Index.java", "normalize", 39, 44, 3),   # insert, lookup, contains
    ("src/app/Main.java", "main", 7, 11, 0),
    ("src/app/Main.java", "loadIndex", 13, 19, 1),    # main
    ("src/app/Report.java", "Report", 9, 11, 0),
    ("src/app/Report.java", "render", 13, 20, 1),     # main
    ("src/app/Report.java", "header", 22, 24, 1),     # render
    ("src/app/Report.java", "formatRow", 26, 28, 1),  # render
    ("src/app/Report.java", "toCsv", 30, 36, 0),
    ("src/app/Report.java", "escape", 38, 40, 2),     # formatRow, toCsv
    ("src/app/Search.java", "Search", 10, 12, 0),
    ("src/app/Search.java", "run", 14, 20, 1),        # main
    ("src/app/Search.java", "rank", 22, 30, 1),       # run
    ("src/app/Search.java", "score", 32, 35, 1),      # rank
    ("src/app/Search.java", "sortResults", 37, 41, 2),  # run, render
    ("src/app/util/Strings.java", "isBlank", 6, 8, 3),  # insert, normalize, capitalize
    ("src/app/util/Strings.java", "repeat", 10, 16, 1),  # header
    ("src/app/util/Strings.java", "join", 18, 27, 1),    # toCsv
    ("src/app/util/Strings.java", "capitalize", 29, 34, 0),
    ("src/app/util/Strings.java", "reverse", 36, 38, 0),  # StringBuilder.reverse() has arity 0
]

# Summaries used for the mean summary length row.
SUMMARIES = [
    "This method is used to sort hits .",
    "This method is used to render the report for main .",
    "Looks up a term .",
]


def fallback_count(text):
    return len(re.findall(r"[A-Za-z0-9_$\x80-\U0010ffff]+|\S", text))


def main():
    root = pathlib.Path(__file__).resolve().parents[1]
    corpus = root / "tests/fixtures/corpus"
    rows = []
    for path, name, first, last, callers in TABLE:
        lines = (corpus / path).read_text(encoding="utf-8").split("\n")[first - 1:last]
        text = re.sub(r"/\*.*?\*/", " ", "\n".join(lines), flags=re.S)
        text = re.sub(r"//[^\n]*", "", text)
        rows.append((path, name, fallback_count(text), callers))
    for r in rows:
        print("\t".join(map(str, r)))
    tokens = [r[2] for r in rows]
    callers = [r[3] for r in rows]
    golden = {
        "method_count": len(rows),
        "token_sum": sum(tokens),
        "max_tokens_per_method": max(tokens),
        "min_tokens_per_method": min(tokens),
        "mean_tokens_per_method": sum(tokens) / len(rows),
        "context_count": len(rows),
        "caller_sum": sum(callers),
        "mean_context_size": sum(callers) / len(rows),
        "methods_without_callers": sum(1 for c in callers if c == 0),
        "summaries": SUMMARIES,
        "summary_token_sum": sum(fallback_count(s) for s in SUMMARIES),
        "mean_summary_tokens": sum(fallback_count(s) for s in SUMMARIES) / len(SUMMARIES),
        "per_method": [{"file": r[0], "method": r[1], "tokens": r[2], "callers": r[3]} for r in rows],
    }
    out = root / "tests/golden/corpus_stats.json"
    out.write_text(json.dumps(golden, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
