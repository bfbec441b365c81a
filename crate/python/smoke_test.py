"""Smoke test for the `dpm` Python extension.

Build the extension first, either with maturin:

    pip install maturin && maturin develop -m crates/py/Cargo.toml

or with plain cargo, in which case this script loads the built library
directly from target/:

    cargo build -p dpm-py --release
    python3 python/smoke_test.py
"""

import importlib.util
import os
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent
FIXTURE = ROOT / "fixtures" / "pilot"


def load_dpm():
    try:
        import dpm  # noqa: F401 -- installed via maturin

        return dpm
    except ImportError:
        pass
    candidates = [os.environ.get("DPM_LIB")] + [
        str(ROOT / "target" / profile / name)
        for profile in ("release", "debug")
        for name in ("libdpm.so", "libdpm.dylib", "dpm.dll")
    ]
    for cand in candidates:
        if cand and os.path.exists(cand):
            tmp = tempfile.mkdtemp()
            target = os.path.join(tmp, "dpm.so")
            shutil.copy(cand, target)
            spec = importlib.util.spec_from_file_location("dpm", target)
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)
            return module
    sys.exit("dpm extension not found; build it with `cargo build -p dpm-py`")


def main():
    dpm = load_dpm()
    transcripts = (FIXTURE / "transcripts.jsonl").read_text()
    labels = (FIXTURE / "labels.tsv").read_text()

    scheme = dpm.CodingScheme()
    assert set(scheme.codes) == {"Q", "R", "F", "I", "M", "O"}
    assert scheme.prefix("chatbot") == "t"

    sessions = dpm.sessionize(transcripts, labels)
    assert len(sessions) == 12, len(sessions)

    stats = dpm.corpus_stats(transcripts, labels)
    assert stats["groups"]["HP"]["session_count"] == 6

    report = dpm.validate(transcripts)
    assert report["missing"] == [] and report["unknown"] == []

    seqs = dpm.sequences(transcripts, labels)
    hp = [(sid, syms) for sid, label, syms in seqs if label == "HP"]
    lp = [(sid, syms) for sid, label, syms in seqs if label == "LP"]

    db = dpm.SequenceDatabase(hp)
    mined = db.mine()
    assert ["[t]Q", "[s]R", "[s]Q"] in [p.symbols for p in mined]
    assert [p.symbols for p in mined] == [p.symbols for p in db.mine_bruteforce()]
    assert db.support(["[t]Q", "[s]R", "[s]Q"])[0] == 6

    c = dpm.contrast(hp, lp, "HP", "LP")
    assert ["[t]Q", "[s]Q"] in [e["symbols"] for e in c["unique_to_b"]]

    patterns = [e["symbols"] for sec in ("unique_to_a", "unique_to_b", "shared") for e in c[sec]]
    rows = [(sid, label, syms) for sid, label, syms in seqs]
    tree = dpm.DecisionTree.fit(rows, patterns)
    print(tree.rules(), end="")
    cv = dpm.loocv(rows, patterns)
    assert cv["accuracy"] == 1.0, cv

    assert dpm.cohen_kappa(["Q", "Q", "Q", "R"], ["Q", "Q", "R", "R"]) == 0.5
    assert dpm.gini(["HP", "HP", "HP", "LP"]) == 0.375
    try:
        dpm.cohen_kappa([], [])
    except ValueError:
        pass
    else:
        raise AssertionError("empty kappa input accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
