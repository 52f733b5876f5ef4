import numpy as np
import pytest

from spinlab import fieldio
from spinlab.torus import ANTIPERIODIC, PERIODIC, SpinorField, TorusLattice, random_bandlimited


def _field(rng, block=()):
    lat = TorusLattice(2, (8, 6), (2.0, 3.5), (PERIODIC, ANTIPERIODIC))
    return random_bandlimited(lat, rng, block, 2, 2)


@pytest.mark.parametrize("block", [(), (3,)])
def test_roundtrip(rng, block, tmp_path):
    f = _field(rng, block)
    path = tmp_path / "f.spnf"
    fieldio.save(path, f)
    g = fieldio.load(path)
    assert g.lattice == f.lattice
    assert np.array_equal(g.values, f.values)


def test_header_layout(rng):
    f = _field(rng)
    buf = fieldio.dumps(f)
    assert buf[:4] == b"SPNF"
    version, n, d, nb = np.frombuffer(buf[4:20], dtype="<u4")
    assert (version, n, d, nb) == (1, 2, 2, 0)
    assert np.frombuffer(buf[20:28], dtype="<u4").tolist() == [8, 6]
    assert np.frombuffer(buf[28:44], dtype="<f8").tolist() == [2.0, 3.5]
    assert list(buf[44:46]) == [0, 1]
    assert len(buf) == 46 + 16 * 8 * 6 * 2


def test_rejects_corrupt(rng):
    buf = fieldio.dumps(_field(rng))
    with pytest.raises(fieldio.FieldFormatError):
        fieldio.loads(b"XXXX" + buf[4:])
    with pytest.raises(fieldio.FieldFormatError):
        fieldio.loads(buf[:-8])
    with pytest.raises(fieldio.FieldFormatError):
        fieldio.loads(buf[:10])
    bad = bytearray(buf)
    bad[4] = 9
    with pytest.raises(fieldio.FieldFormatError):
        fieldio.loads(bytes(bad))


def test_dump_is_deterministic(rng):
    f = _field(rng)
    assert fieldio.dumps(SpinorField(f.lattice, f.values.copy())) == fieldio.dumps(f)
