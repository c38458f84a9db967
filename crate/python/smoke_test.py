"""Quick end-to-end check of the Python bindings.

Build first:  pip install --no-build-isolation -e crates/python
Then run:     python python/smoke_test.py
"""

import arrsheaf_py as ar


def main():
    braid = ar.Arrangement.catalog("braid", [3])
    assert braid.ell == 3 and len(braid) == 6

    lat = braid.lattice()
    assert lat.rank_counts() == [1, 6, 7, 1]
    assert lat.characteristic_polynomial() == [-6, 11, -6, 1]

    again = ar.Arrangement.from_text(braid.to_text())
    assert again.normals() == braid.normals()

    assert ar.derivation_dims(braid, [0, 1, 2]) == [0, 1, 4]
    assert len(ar.derivation_basis(braid, 1)) == 1

    free = ar.freeness(braid)
    assert free["certificate"]["status"] == "free"
    assert free["certificate"]["exponents"] == [1, 2, 3]
    assert free["factorization"]["status"] == "match"

    generic = ar.Arrangement.catalog("generic", [3, 4])
    assert ar.freeness(generic)["certificate"]["status"] == "not-free"
    table = ar.cohomology(generic, "D", window=(-2, 3))
    h1 = {e["d"]: e["dim"] for e in table["entries"] if e["n"] == 1}
    assert h1[0] == 1 and sum(h1.values()) == 1

    bool2 = ar.Arrangement.from_normals([[1, 0], [0, 1]])
    o = ar.cohomology(bool2, "O", window=(-4, 2))
    top = {e["d"]: e["dim"] for e in o["entries"] if e["n"] == 1}
    assert top == {-4: 3, -3: 2, -2: 1, -1: 0, 0: 0, 1: 0, 2: 0}

    punctured = ar.oracle(generic, "D", window=(-1, 2), kmax=6)
    assert punctured["projective_dimension"]["value"] == 1

    k = ar.verify_kunneth(generic, window=(-2, 2), kmax=6)
    assert k["mismatches"] == []

    r = ar.report(braid, window=(-3, 3))
    assert r["consistency"] == [] and r["freeness"]["free"]

    try:
        ar.Arrangement.catalog("nonsense", [1])
    except ar.ArrsheafError:
        pass
    else:
        raise AssertionError("unknown catalog entry accepted")

    print("arrsheaf_py", ar.__version__, "ok")


if __name__ == "__main__":
    main()
