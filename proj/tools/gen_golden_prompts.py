#!/usr/bin/env python3
"""Writes tests/golden/prompts/*.txt from inputs.json.

The prompt shapes are spelled out here by plain string concatenation so the
golden files do not depend on the C++ renderer or its template resource.
"""
import json
import pathlib
import sys

A_PREFIX = (
    "Write a short description of each of the following Java methods, do not duplicate the code in "
    "your answer, just give a list of the descriptions in paragraph form for each description: "
)
B_1 = "Consider the following Java method: "
B_2 = " And consider the following description of Java methods that CALL that first Java method: "
B_3 = (
    " Now, write a one-sentence description of WHY the first method is used.  The sentence should "
    "start with \"This method is used to\".  The WHY description should only include information "
    "from the methods that CALL the first method and not already in the first method."
)


def caller_descriptions(sources):
    return A_PREFIX + "\n---\n".join(sources)


def why(target, descriptions):
    return B_1 + target + B_2 + descriptions + B_3


def tdat(target):
    return "TDAT\n" + target + "\nSUMMARY\n"


def tdat_context(target, descriptions, summary):
    text = "TDAT\n" + target + "\n"
    if descriptions:
        text += "CONTEXT\n" + "\n".join(descriptions) + "\n"
    text += "SUMMARY\n"
    if summary is not None:
        text += summary
    return text


def main():
    out_dir = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else pathlib.Path(__file__).resolve().parents[1] / "tests/golden/prompts"
    inputs = json.loads((out_dir / "inputs.json").read_text(encoding="utf-8"))
    forms = {
        "caller_descriptions": lambda args: caller_descriptions(*args),
        "why": lambda args: why(*args),
        "tdat": lambda args: tdat(*args),
        "tdat_context": lambda args: tdat_context(*args),
    }
    for form, render in forms.items():
        for i, args in enumerate(inputs[form], start=1):
            (out_dir / f"{form}_{i}.txt").write_bytes(render(args).encode("utf-8"))


if __name__ == "__main__":
    main()
