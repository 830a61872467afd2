"""Builds the extension module and checks a few fixture values.

Run from the repository root: python3 python/smoke_test.py
"""

import shutil
import subprocess
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "typek-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "release" / "libtypek.so"
    dest = Path(tempfile.mkdtemp())
    shutil.copy(lib, dest / "typek.so")
    sys.path.insert(0, str(dest))
    import typek

    return typek


def main():
    typek = load()
    fig1 = typek.StageGame.builtin("fig1")
    fig2 = typek.StageGame.builtin("fig2")
    fig4 = typek.StageGame.builtin("fig4")

    assert typek.minimax(fig1) == [-3, -3, 0]
    assert typek.minimax(fig4) == [2, 2, -1]
    assert typek.minimax(fig2, "correlated") == [Fraction(1, 2)] * 2

    again = typek.StageGame.parse(fig4.to_document())
    assert again.players == fig4.players
    assert again.payoff(["L", "R", "L"]) == fig4.payoff(["L", "R", "L"])

    assert typek.discount_threshold(fig4, "X,Y", "L,R|R,L", "X") == Fraction(1, 4)
    r = typek.verify_type_k(fig4, "X,Y", "L,R|R,L", delta="1/5")
    assert r["is_type_k"] and not r["verdict"]
    assert r["profile_payoff"] == [5, 5, -1]

    payoffs = [e["profile_payoff"] for e in typek.enumerate_type_k(fig4, max_period=2)]
    assert [3, 3, 4] in payoffs and [5, 5, -1] in payoffs

    sim = typek.simulate(fig4, ["grim", "grim", "myopic"], group="X,Y", path="L,R|R,L", rounds=199)
    assert sim["averages"] == [5, 5, -1]

    curve = typek.convergence(trials=20000, rounds=10, seed=1)
    assert all(a <= b for a, b in zip(curve, curve[1:])) and curve[-1] > 0.99

    geo = typek.geometry(fig4, group="X,Y", project=("X", "Y"))
    assert (9, 1) in geo["projection"] and (1, 9) in geo["projection"]

    try:
        typek.StageGame.builtin("nope")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown builtin accepted")
    print("python smoke test ok")


if __name__ == "__main__":
    main()
