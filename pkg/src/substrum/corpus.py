"""Bundled example substitutions.

Each entry carries the rule text, the verdict the classifier is expected to
reach, and a one-line note on why the example matters.  `write_corpus` dumps
the rules as .sub files plus a machine-readable manifest so the expectations
travel with the files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .core import Substitution, parse_substitution

__all__ = ["CorpusEntry", "CORPUS", "corpus_entry", "load", "write_corpus"]

MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    rules: str
    expected_verdict: str
    expected_reason: str
    note: str

    @property
    def filename(self) -> str:
        return self.name + ".sub"

    def substitution(self) -> Substitution:
        return parse_substitution(self.rules)


CORPUS: tuple[CorpusEntry, ...] = (
    CorpusEntry(
        name="thue_morse",
        rules="0 -> 0 1\n1 -> 1 0\n",
        expected_verdict="Singular",
        expected_reason="NoSqrtQEigenvalue",
        note="Thue-Morse; length 2, bijective abelian, eigenvalues {2, 0}.",
    ),
    CorpusEntry(
        name="bijective_nonabelian",
        rules="1 -> 1 1 3\n2 -> 2 3 2\n3 -> 3 2 4\n4 -> 4 4 1\n",
        expected_verdict="Singular",
        expected_reason="NoSqrtQEigenvalue",
        note=(
            "Length 3 on 4 letters, bijective with non-abelian column group; "
            "eigenvalues {3, 2, 1, 1}, so the second eigenvalue exceeds sqrt(3) "
            "yet none has modulus sqrt(3)."
        ),
    ),
    CorpusEntry(
        name="height_two",
        rules="1 -> 1 4 2\n2 -> 2 5 3\n3 -> 2 5 1\n4 -> 5 1 4\n5 -> 4 1 5\n",
        expected_verdict="PurelyDiscrete",
        expected_reason="DekkingCoincidence",
        note=(
            "Length 3 on 5 letters with height 2; the pure base on 6 two-letter "
            "blocks has a coincidence, so the spectrum is purely discrete."
        ),
    ),
    CorpusEntry(
        name="small_second_eigenvalue",
        rules="0 -> 0 0 1\n1 -> 1 2 2\n2 -> 2 1 0\n",
        expected_verdict="Singular",
        expected_reason="NoSqrtQEigenvalue",
        note=(
            "Length 3 on 3 letters, bijective; eigenvalues {3, 1, 0}, so every "
            "non-Perron eigenvalue lies strictly below sqrt(3) and singularity "
            "also follows from the second-eigenvalue bound."
        ),
    ),
    CorpusEntry(
        name="rudin_shapiro",
        rules="0 -> 0 1\n1 -> 0 2\n2 -> 3 1\n3 -> 3 2\n",
        expected_verdict="Inconclusive",
        expected_reason="SqrtQPresent",
        note=(
            "Rudin-Shapiro; non-bijective, eigenvalues {2, sqrt(2), -sqrt(2), 0}. "
            "The sqrt(q) witnesses are genuine: this system has a Lebesgue "
            "spectral component, so Inconclusive is the right refusal."
        ),
    ),
    CorpusEntry(
        name="modified_rudin_shapiro",
        rules="0 -> 0 1\n1 -> 2 0\n2 -> 1 3\n3 -> 3 2\n",
        expected_verdict="Inconclusive",
        expected_reason="SqrtQPresent",
        note=(
            "Bijective variant of Rudin-Shapiro with the same eigenvalues "
            "{2, sqrt(2), -sqrt(2), 0}; known singular by other means, which the "
            "sqrt(q) criterion alone cannot see — it is sufficient for "
            "singularity, not necessary."
        ),
    ),
    CorpusEntry(
        name="periodic",
        rules="0 -> 0 1 0\n1 -> 1 0 1\n",
        expected_verdict="Inconclusive",
        expected_reason="PreconditionFailed(periodic)",
        note=(
            "Fixed point is the periodic word (01)^inf; the classifier refuses "
            "periodic systems (their spectrum is trivially discrete and the "
            "aperiodicity hypotheses fail)."
        ),
    ),
)

_BY_NAME = {entry.name: entry for entry in CORPUS}


def corpus_entry(name: str) -> CorpusEntry:
    return _BY_NAME[name]


def load(name: str) -> Substitution:
    """Parse one bundled example by name."""
    return _BY_NAME[name].substitution()


def write_corpus(directory: Path) -> list[str]:
    """Write every example as <name>.sub plus manifest.json; returns the file
    names written (manifest last)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written: list[str] = []
    for entry in CORPUS:
        text = f"# {entry.note}\n" + entry.rules
        (directory / entry.filename).write_text(text, encoding="utf-8")
        written.append(entry.filename)
    manifest = {
        "schema_version": 1,
        "entries": [
            {
                "name": entry.name,
                "file": entry.filename,
                "expected_verdict": entry.expected_verdict,
                "expected_reason": entry.expected_reason,
                "note": entry.note,
            }
            for entry in CORPUS
        ],
    }
    (directory / MANIFEST_NAME).write_text(
        json.dumps(manifest, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    written.append(MANIFEST_NAME)
    return written
