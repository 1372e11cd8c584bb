#!/usr/bin/env python3
# Copyright 2026 The REDistill Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""End-to-end tests of the redistill binary: exit codes, formats, seeds, schemas.

usage: cli_test.py PATH/TO/redistill SOURCE_DIR
"""

import csv
import io
import json
import os
import pathlib
import subprocess
import sys
import tempfile
import unittest

BIN = None
SRC = None
SMOKE = None


def run(*args, env=None, cwd=None):
    full_env = dict(os.environ)
    full_env.pop("REDISTILL_OUT_DIR", None)
    full_env.update(env or {})
    p = subprocess.run([BIN, *map(str, args)], capture_output=True, text=True,
                       env=full_env, cwd=cwd, timeout=300)
    return p.returncode, p.stdout, p.stderr


def validator(name):
    sys.path.insert(0, str(SRC / "tools"))
    import validate_json
    return validate_json.validator(name)


class Base(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = pathlib.Path(self._tmp.name)
        self.out = self.tmp / "out"

    def tearDown(self):
        self._tmp.cleanup()

    def ok(self, *args, **kw):
        code, out, err = run(*args, **kw)
        self.assertEqual(code, 0, f"{args}: {err}")
        return out

    def code(self, *args, **kw):
        return run(*args, **kw)[0]

    def json_out(self, *args):
        return json.loads(self.ok("--format", "json", *args))

    def teacher(self):
        self.ok("--config", SMOKE, "--out", self.out, "train-teacher")
        return self.out / "teacher_seed0.json"


class ExitCodes(Base):
    def test_usage_errors_exit_2(self):
        bad = [
            [],
            ["frobnicate"],
            ["--format", "xml", "verify"],
            ["verify", "--suite", "nope"],
            ["verify", "--trials", "many"],
            ["train-teacher"],
            ["distill"],
            ["sweep-lambda"],
            ["compare"],
            ["--config", SMOKE, "sweep-lambda", "--lambdas", "0,x"],
            ["--config", SMOKE, "distill", "--loss", "mse"],
            ["report"],
            ["report", self.tmp / "missing.json"],
            ["gof"],
            ["gof", "--counts", "1,2", "--expected", "0.5"],
            ["power"],
            ["power", "--delta", "-1"],
            ["power", "--delta", "9", "--k", "10"],
            ["power", "--delta", "0.2", "--trials", "10"],
            ["influence", "--epsilon", "0"],
        ]
        for args in bad:
            with self.subTest(args=args):
                self.assertEqual(self.code(*args), 2)

    def test_success_exits_0(self):
        good = [
            ["verify", "--trials", "50"],
            ["gof", "--counts", "10,20,30"],
            ["influence", "--samples", "30"],
            ["power", "--delta", "0", "--trials", "200"],
            ["--config", SMOKE, "--out", self.out, "train-teacher"],
            ["--config", SMOKE, "--out", self.out, "sweep-lambda", "--lambdas", "0"],
        ]
        for args in good:
            with self.subTest(args=args):
                self.assertEqual(self.code(*args), 0)

    def test_failures_exit_1(self):
        bad_json = self.tmp / "bad.json"
        bad_json.write_text('{\n  "seeds": [1,\n   2,, ]\n}\n')
        unknown = self.tmp / "unknown.json"
        unknown.write_text('{"dataset": {"sizes": 3}}')
        not_a_checkpoint = self.tmp / "ckpt.json"
        not_a_checkpoint.write_text('{"format": "redistill-mlp", "schema_version": 7}')
        cases = [
            (["--config", bad_json, "sweep-lambda"], "bad.json:3"),
            (["--config", unknown, "sweep-lambda"], "/dataset/sizes"),
            (["--config", self.tmp / "absent.json", "compare"], "absent.json"),
            (["--config", SMOKE, "--out", self.out, "distill", "--teacher", not_a_checkpoint],
             "schema_version"),
            (["verify", "--suite", "gradients", "--trials", "50", "--perturb-gradient", "1e-3"],
             "gradients failed"),
        ]
        for args, needle in cases:
            with self.subTest(args=args):
                code, out, err = run(*args)
                self.assertEqual(code, 1, err)
                self.assertIn(needle, out + err)


class Verify(Base):
    def test_suite_flag_selects_one_suite(self):
        j = self.json_out("verify", "--suite", "gradients", "--trials", "5000")
        self.assertTrue(j["passed"])
        self.assertEqual(j["trials"], 5000)
        self.assertEqual([s["name"] for s in j["suites"]], ["gradients"])

    def test_default_runs_all_suites(self):
        j = self.json_out("verify", "--trials", "100")
        self.assertEqual(sorted(s["name"] for s in j["suites"]),
                         ["axioms", "gradients", "identities", "loss"])

    def test_perturbed_gradient_prints_inputs(self):
        code, out, _ = run("--format", "json", "verify", "--suite", "gradients",
                           "--trials", "50", "--perturb-gradient", "1e-3")
        self.assertEqual(code, 1)
        suite = json.loads(out)["suites"][0]
        self.assertFalse(suite["passed"])
        self.assertIn("lambda", suite["counterexample"])


class Sweep(Base):
    def sweep(self, *extra, fmt="table"):
        return self.ok("--config", SMOKE, "--out", self.out, "--format", fmt,
                       "sweep-lambda", *extra)

    def test_two_lambda_table(self):
        j = json.loads(self.sweep("--lambdas", "0,0.6667", fmt="json"))
        self.assertEqual([r["lambda"] for r in j["rows"]], [0.0, 0.6667])
        table = self.sweep("--lambdas", "0,0.6667")
        body = [l for l in table.splitlines() if l.strip() and l.split()[0][0].isdigit()]
        self.assertEqual(len(body), 2)

    def test_csv_header_and_default_grid(self):
        rows = list(csv.reader(io.StringIO(self.sweep(fmt="csv"))))
        self.assertEqual(rows[0], ["lambda", "mean_acc", "std_acc", "n_seeds"])
        lambdas = [float(r[0]) for r in rows[1:]]
        expected = [0, 1 / 3, 1 / 2, 2 / 3, 1, 3 / 2, 2]
        self.assertEqual(len(lambdas), 7)
        for got, want in zip(lambdas, expected):
            self.assertAlmostEqual(got, want, places=12)
        self.assertTrue((self.out / "sweep.csv").exists())
        self.assertTrue((self.out / "sweep_metrics.json").exists())

    def test_env_sets_default_out_dir_and_flag_wins(self):
        env_dir = self.tmp / "from_env"
        self.ok("--config", SMOKE, "sweep-lambda", "--lambdas", "1",
                env={"REDISTILL_OUT_DIR": str(env_dir)})
        self.assertTrue((env_dir / "sweep_metrics.json").exists())
        self.ok("--config", SMOKE, "--out", self.out, "sweep-lambda", "--lambdas", "1",
                env={"REDISTILL_OUT_DIR": str(env_dir / "unused")})
        self.assertTrue((self.out / "sweep_metrics.json").exists())
        self.assertFalse((env_dir / "unused").exists())


class Seeds(Base):
    """Same --seed, same bytes; a different seed changes the random outputs."""

    def twice(self, *args):
        a = self.ok("--seed", "11", "--format", "json", *args)
        b = self.ok("--seed", "11", "--format", "json", *args)
        c = self.ok("--seed", "12", "--format", "json", *args)
        return json.loads(a), json.loads(b), json.loads(c)

    def strip_times(self, j):
        for r in j.get("records", []):
            r.pop("wall_time_seconds", None)
        return j

    def test_reproducible_per_subcommand(self):
        cases = [
            ["verify", "--trials", "50"],
            ["influence", "--samples", "30"],
            ["power", "--delta", "0.3", "--trials", "300"],
            ["gof", "--counts", "3,4,5"],
            ["--config", SMOKE, "--out", self.out, "sweep-lambda", "--lambdas", "0,1"],
            ["--config", SMOKE, "--out", self.out, "compare"],
            ["--config", SMOKE, "--out", self.out, "train-teacher"],
            ["--config", SMOKE, "--out", self.out, "distill"],
        ]
        for args in cases:
            with self.subTest(args=args[-1] if args[0] != "--config" else args[4]):
                a, b, c = (self.strip_times(x) for x in self.twice(*args))
                self.assertEqual(a, b)
                self.assertEqual(a["seed"], 11)
                self.assertEqual(c["seed"], 12)

    def test_seed_changes_monte_carlo(self):
        a, _, c = self.twice("power", "--delta", "0.3", "--trials", "300")
        self.assertNotEqual(a["estimate"]["rejection_rate"], c["estimate"]["rejection_rate"])

    def test_seed_recorded_in_metrics(self):
        self.ok("--seed", "5", "--config", SMOKE, "--out", self.out, "compare")
        records = json.loads((self.out / "compare_metrics.json").read_text())
        self.assertEqual(sorted({r["seed"] for r in records}), [5, 6])


class Power(Base):
    def test_dip_selected_by_negative_delta_and_bump_direction(self):
        common = ["power", "--k", "10", "--delta", "0.5", "--trials", "2000"]
        hi = self.json_out("--seed", "3", *common, "--lambda", "1")
        lo = self.json_out("--seed", "3", *common, "--lambda", "0")
        self.assertGreaterEqual(hi["estimate"]["rejection_rate"], lo["estimate"]["rejection_rate"])
        dip = self.json_out("power", "--delta", "-0.5", "--trials", "200")
        self.assertEqual(dip["delta"], -0.5)

    def test_null_calibration(self):
        j = self.json_out("--seed", "1", "power", "--delta", "0", "--trials", "4000")
        e = j["estimate"]
        self.assertLessEqual(abs(e["rejection_rate"] - e["significance"]), 3 * e["std_error"])


class Schemas(Base):
    def test_every_json_output_validates(self):
        cli = validator("cli-output.schema.json")
        metrics = validator("metrics.schema.json")
        ckpt = validator("checkpoint.schema.json")
        config = validator("experiment.schema.json")

        ckpt_path = self.teacher()
        outputs = [
            ["verify", "--trials", "30"],
            ["influence", "--samples", "30"],
            ["gof", "--counts", "10,20,30"],
            ["power", "--delta", "-0.2", "--trials", "200"],
            ["--config", SMOKE, "--out", self.out, "train-teacher"],
            ["--config", SMOKE, "--out", self.out, "distill", "--teacher", ckpt_path],
            ["--config", SMOKE, "--out", self.out, "sweep-lambda", "--lambdas", "0,0.5"],
            ["--config", SMOKE, "--out", self.out, "compare"],
            ["--out", self.out, "report", self.out / "sweep_metrics.json",
             self.out / "compare_metrics.json"],
        ]
        kinds = set()
        for args in outputs:
            with self.subTest(args=args):
                j = self.json_out(*args)
                cli.validate(j)
                kinds.add(j["kind"])
        self.assertEqual(len(kinds), 9)

        for f in sorted(self.out.glob("*metrics*.json")):
            with self.subTest(file=f.name):
                metrics.validate(json.loads(f.read_text()))
        for f in [ckpt_path, *self.out.glob("student_*_seed*[0-9].json")]:
            with self.subTest(file=f.name):
                ckpt.validate(json.loads(f.read_text()))
        for f in sorted((SRC / "configs").glob("*.json")):
            with self.subTest(file=f.name):
                config.validate(json.loads(f.read_text()))

    def test_schema_rejects_wrong_kind(self):
        cli = validator("cli-output.schema.json")
        j = self.json_out("gof", "--counts", "1,2,3")
        j["kind"] = "power"
        self.assertFalse(cli.is_valid(j))


class Report(Base):
    def test_curve_csv_and_method_table(self):
        self.ok("--config", SMOKE, "--out", self.out, "sweep-lambda", "--lambdas", "0,2")
        self.ok("--config", SMOKE, "--out", self.out, "compare")
        table = self.ok("--out", self.out, "report", self.out / "sweep_metrics.json",
                        self.out / "compare_metrics.json")
        for method in ("kd", "dkd", "redistill"):
            self.assertIn(method, table)
        rows = list(csv.reader(io.StringIO((self.out / "lambda_curve.csv").read_text())))
        self.assertEqual(rows[0], ["lambda", "mean_acc", "std_acc", "n_seeds"])
        self.assertEqual([float(r[0]) for r in rows[1:]], sorted(float(r[0]) for r in rows[1:]))


def main():
    global BIN, SRC, SMOKE
    if len(sys.argv) < 3:
        print(__doc__.strip(), file=sys.stderr)
        return 2
    BIN = str(pathlib.Path(sys.argv[1]).resolve())
    SRC = pathlib.Path(sys.argv[2]).resolve()
    SMOKE = str(SRC / "configs" / "smoke.json")
    prog = unittest.main(argv=[sys.argv[0], "-v", *sys.argv[3:]], exit=False)
    return 0 if prog.result.wasSuccessful() else 1


if __name__ == "__main__":
    sys.exit(main())
