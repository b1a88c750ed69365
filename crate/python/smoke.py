"""Smoke test for the autodens_py extension.

Builds the extension with cargo unless AUTODENS_PY_LIB points at a built
library, then imports it and checks a few known values.
"""
import importlib.util
import os
import shutil
import subprocess
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def load():
    lib = os.environ.get("AUTODENS_PY_LIB")
    if lib is None:
        subprocess.run(
            ["cargo", "build", "--release", "-p", "autodens-py", "--features", "extension-module"],
            cwd=ROOT,
            check=True,
        )
        lib = os.path.join(ROOT, "target", "release", "libautodens_py.so")
    tmp = tempfile.mkdtemp()
    dest = os.path.join(tmp, "autodens_py.so")
    shutil.copy(lib, dest)
    spec = importlib.util.spec_from_file_location("autodens_py", dest)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def main():
    ad = load()
    pf = ad.Dfao.load(os.path.join(ROOT, "automata", "paperfolding.aut"))
    assert ad.prime_density(pf) == {"0": "1/2", "1": "1/2"}

    three = ad.Dfao.load(os.path.join(ROOT, "automata", "threestate.aut"))
    r = ad.density(three, "primes")
    assert not r["exists"]
    ext = ad.extremal(three, "b", "primes")
    assert (ext["upper"], ext["lower"]) == ("3/4", "1/2"), ext

    tm = ad.Dfao.load(os.path.join(ROOT, "automata", "thue_morse.aut"))
    assert ad.square_density(tm)["0"] == "1/2"
    assert ad.verify(tm, "squares", 50000)["comparison"]["pass"]

    parity = ad.Dfao.load(os.path.join(ROOT, "automata", "parity3.aut"))
    c = ad.info(parity)["components"][0]
    assert (c["group_order"], c["d"]) == (2, 2), c
    print("smoke ok")


if __name__ == "__main__":
    sys.exit(main())
