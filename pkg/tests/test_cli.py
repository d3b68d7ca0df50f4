import csv

import numpy as np
import pytest

from rdmcmc import archive
from rdmcmc.cli import main, read_symbols, write_symbols
from rdmcmc.image import Image2D, read_pbm, write_pbm
from rdmcmc.sources import bsc, bsms


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def report(line):
    return {k: float(v) for k, v in (kv.split("=") for kv in line.split())}


class TestCompress:
    def test_round_trip(self, tmp_path, capsys):
        x = bsms(0.2, 2000, seed=1)
        write_symbols(tmp_path / "x.txt", x)
        code, out, _ = run(capsys, "compress", "--input", tmp_path / "x.txt", "--alpha", 2,
                           "--k", 3, "--output", tmp_path / "x.rdmc")
        assert code == 0
        rep = report(out.strip())
        assert set(rep) == {"Hk", "dn", "lz_rate", "le_rate"}
        assert rep["le_rate"] >= rep["Hk"]
        code, _, _ = run(capsys, "decompress", "--input", tmp_path / "x.rdmc",
                         "--output", tmp_path / "y.txt")
        y = read_symbols(tmp_path / "y.txt")
        assert y.size == x.size
        assert np.mean(x != y) == pytest.approx(rep["dn"], abs=1e-6)
        assert archive.read(tmp_path / "x.rdmc").k == 3

    def test_constant_input(self, tmp_path, capsys):
        n = 5000
        write_symbols(tmp_path / "c.txt", np.zeros(n, dtype=int))
        code, out, _ = run(capsys, "compress", "--input", tmp_path / "c.txt", "--alpha", 3,
                           "--output", tmp_path / "c.rdmc")
        rep = report(out.strip())
        assert rep["dn"] == 0 and rep["Hk"] == 0
        # phrases of length 1, 2, 3, ...: about sqrt(2n) of them, each log2(j) + 1 bits
        phrases = int(np.ceil(np.sqrt(2 * n)))
        assert rep["lz_rate"] * n <= phrases * (np.log2(phrases) + 1)

    def test_image(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        img = Image2D(20, 12, (rng.random(240) < 0.1).astype(int))
        write_pbm(tmp_path / "a.pbm", img)
        run(capsys, "compress", "--input", tmp_path / "a.pbm", "--alpha", 4,
            "--output", tmp_path / "a.rdmc", "--png-size", 400)
        _, out, _ = run(capsys, "decompress", "--input", tmp_path / "a.rdmc",
                        "--output", tmp_path / "b.pbm")
        assert "k=6" in out
        back = read_pbm(tmp_path / "b.pbm")
        assert (back.width, back.height) == (20, 12)

    def test_sliding_block_mode(self, tmp_path, capsys):
        write_symbols(tmp_path / "x.txt", bsms(0.2, 300, seed=2))
        code, out, _ = run(capsys, "compress", "--mode", "sb", "--input", tmp_path / "x.txt",
                           "--alpha", 5, "--k", 2, "--schedule", "logarithmic", "--T0", 3)
        assert code == 0 and "Hk=" in out

    def test_bad_config(self, tmp_path, capsys):
        (tmp_path / "bad.cfg").write_text("colour = red\n")
        code, _, err = run(capsys, "compress", "--config", tmp_path / "bad.cfg")
        assert code == 2 and "unknown key" in err

    def test_decompress_rejects_version(self, tmp_path, capsys):
        data = bytearray(archive.pack(archive.Archive([0, 1, 1, 0], 1, 2)))
        data[4] = 99
        (tmp_path / "v.rdmc").write_bytes(bytes(data))
        code, _, err = run(capsys, "decompress", "--input", tmp_path / "v.rdmc",
                           "--output", tmp_path / "o.txt")
        assert code == 2 and "version" in err


class TestTrace:
    def _trace(self, tmp_path, capsys, *extra):
        path = tmp_path / "t.csv"
        code, _, _ = run(capsys, "trace", "--source", "bernoulli", "--p", 0.2, "--n", 1500,
                         "--k", 4, "--alpha", 4, "--gamma", 0.7, "--output", path, *extra)
        assert code == 0
        with open(path) as fh:
            return list(csv.reader(fh))

    def test_columns_and_consistency(self, tmp_path, capsys):
        rows = self._trace(tmp_path, capsys)
        assert rows[0] == ["iteration", "Hk_bits", "distortion", "energy"]
        assert len(rows) == 12
        for t, hk, dn, e in rows[1:]:
            assert abs(float(e) - 1500 * (float(hk) + 4 * float(dn))) <= 1e-6

    def test_r_zero(self, tmp_path, capsys):
        rows = self._trace(tmp_path, capsys, "--r-mult", 0)
        assert len(rows) == 2 and rows[1][0] == "0" and float(rows[1][2]) == 0.0

    def test_deterministic(self, tmp_path, capsys):
        assert self._trace(tmp_path, capsys) == self._trace(tmp_path, capsys)


class TestSweep:
    def test_rows(self, tmp_path, capsys):
        path = tmp_path / "s.csv"
        code, _, _ = run(capsys, "sweep", "--n", 1500, "--k", 4, "--alpha", "4:-1:2",
                         "--seeds", "0,1", "--workers", 2, "--output", path)
        assert code == 0
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 3 * 2 + 3
        means = [r for r in rows if r["seed"] == "mean"]
        assert [float(r["alpha"]) for r in means] == [4.0, 3.0, 2.0]
        d = [float(r["distortion"]) for r in means]
        assert d[0] <= d[1] <= d[2]

    def test_workers_do_not_change_results(self, tmp_path, capsys):
        outs = []
        for w in (1, 2):
            _, out, _ = run(capsys, "sweep", "--n", 800, "--k", 3, "--alpha", "3,2",
                            "--seeds", "0-2", "--workers", w)
            outs.append(out)
        assert outs[0] == outs[1]


class TestDenoise:
    def test_noiseless_channel(self, tmp_path, capsys):
        x = bsms(0.2, 1000, seed=3)
        write_symbols(tmp_path / "x.txt", x)
        _, out, _ = run(capsys, "denoise", "--input", tmp_path / "x.txt", "--delta", 0,
                        "--clean", tmp_path / "x.txt")
        assert "ber=0.000000" in out

    def test_bsc(self, tmp_path, capsys):
        x = bsms(0.1, 4000, seed=4)
        write_symbols(tmp_path / "x.txt", x)
        write_symbols(tmp_path / "z.txt", bsc(x, 0.1, seed=5))
        code, out, _ = run(capsys, "denoise", "--input", tmp_path / "z.txt", "--delta", 0.1,
                           "--k", 5, "--clean", tmp_path / "x.txt", "--output", tmp_path / "xh.txt")
        assert code == 0
        fields = dict(kv.split("=") for kv in out.split())
        assert float(fields["ber"]) < float(fields["noisy_ber"])
        assert read_symbols(tmp_path / "xh.txt").size == 4000

    def test_image(self, tmp_path, capsys):
        rr, cc = np.mgrid[0:40, 0:48]
        img = Image2D(48, 40, (((rr - 20) ** 2 + (cc - 22) ** 2) < 150).astype(int).ravel())
        write_pbm(tmp_path / "c.pbm", img)
        write_pbm(tmp_path / "n.pbm", img.with_pixels(bsc(img.pixels, 0.04, seed=1)))
        code, out, _ = run(capsys, "denoise", "--input", tmp_path / "n.pbm", "--delta", 0.04,
                           "--clean", tmp_path / "c.pbm", "--output", tmp_path / "d.pbm")
        assert code == 0
        fields = dict(kv.split("=") for kv in out.split())
        assert float(fields["ber"]) < float(fields["noisy_ber"])

    def test_needs_noise(self, tmp_path, capsys):
        write_symbols(tmp_path / "x.txt", [0, 1, 1])
        code, _, err = run(capsys, "denoise", "--input", tmp_path / "x.txt")
        assert code == 2 and "delta" in err


class TestOracle:
    def test_block(self, tmp_path, capsys):
        write_symbols(tmp_path / "x.txt", [0, 1, 1, 0])
        _, out, _ = run(capsys, "oracle", "--input", tmp_path / "x.txt", "--k", 1, "--alpha", 1)
        assert out.strip() == "energy=1.000000000 y=0111"

    def test_sliding_block(self, tmp_path, capsys):
        write_symbols(tmp_path / "x.txt", bsms(0.2, 40, seed=1))
        code, out, _ = run(capsys, "oracle", "--mode", "sb", "--input", tmp_path / "x.txt",
                           "--k", 1, "--alpha", 2)
        assert code == 0 and "code=" in out
