import csv
import json
import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from transmission.channels import make_bit_flip, make_depolarizing
from transmission.exceptions import NoDataError, OutOfRegimeError, UsageError
from transmission.forms import validate_config
from transmission.runner import (
    NOISE_COLUMNS,
    RUN_COLUMNS,
    SAMPLE_COLUMNS,
    SWEEP_COLUMNS,
    Waveform,
    build_channel,
    emit_waveform,
    execute,
    ingest_waveform,
    noise_table,
    scheduled_param,
)
from transmission.utils import config_hash


def sine_waveform(samples, amplitude=0.04):
    t = np.linspace(0.0, 1.0, samples)
    return Waveform(t, amplitude * np.sin(2 * math.pi * 3 * t))


def base_config(**overrides):
    data = {
        "mode": "single",
        "ensemble": {"components": [[1.0, math.pi / 2]]},
        "channel": {"name": "identity"},
        "bases": {"epsilon": 0.05},
        "sampling": {"exact": True},
        "signal": {"phi": 0.01},
    }
    data.update(overrides)
    return data


class TempDirTestCase(SimpleTestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self._tmp.cleanup)
        self.tmp = Path(self._tmp.name)

    def run_config(self, data, name="out"):
        return execute(data, validate_config(data), self.tmp / name)


class WaveformTests(TempDirTestCase):
    def test_round_trip(self):
        waveform = sine_waveform(10_000)
        path = self.tmp / "wave.csv"
        emit_waveform(waveform, path)
        self.assertEqual(path.read_text().splitlines()[0], "t,phi")
        loaded = ingest_waveform(path)
        self.assertEqual(len(loaded), 10_000)
        np.testing.assert_array_equal(loaded.t, waveform.t)
        np.testing.assert_array_equal(loaded.phi, waveform.phi)

    def test_single_sample(self):
        path = self.tmp / "wave.csv"
        path.write_text("t, phi\n0.5,0.02\n")
        loaded = ingest_waveform(path)
        self.assertEqual(len(loaded), 1)
        self.assertEqual(loaded.phi[0], 0.02)

    def test_bad_files(self):
        cases = {
            "header.csv": "time,phase\n0,0.01\n",
            "columns.csv": "t,phi\n0\n1\n",
            "text.csv": "t,phi\n0,abc\n",
            "empty.csv": "t,phi\n",
        }
        for name, text in cases.items():
            path = self.tmp / name
            path.write_text(text)
            with self.assertRaises(UsageError, msg=name):
                ingest_waveform(path)
        with self.assertRaises(UsageError):
            ingest_waveform(self.tmp / "missing.csv")

    def test_time_must_increase(self):
        with self.assertRaises(UsageError) as ctx:
            Waveform([0.0, 1.0, 1.0], [0.0, 0.0, 0.0])
        self.assertIn("sample 2", str(ctx.exception))

    def test_regime(self):
        with self.assertRaises(OutOfRegimeError):
            Waveform([0.0, 1.0], [0.0, 0.31])
        with self.assertLogs("transmission.runner", level="WARNING"):
            Waveform([0.0, 1.0], [0.0, 0.2])


class ChannelSpecTests(SimpleTestCase):
    def test_build_channel(self):
        spec = {"name": "bit_flip", "param": 0.2}
        self.assertEqual(build_channel(spec).name, "bit_flip(0.2)")
        self.assertEqual(build_channel(spec, 0.3).name, "bit_flip(0.3)")
        rtn = {"name": "rtn", "nu": 1.0, "coupling": 0.5, "t": 0.2}
        self.assertIn("t=0.7", build_channel(rtn, 0.7).name)
        self.assertEqual(build_channel({"name": "identity"}).name, "identity")

    def test_scheduled_param(self):
        spec = {"name": "phase_flip", "schedule": [(0.0, 0.1), (1.0, 0.3)]}
        self.assertAlmostEqual(scheduled_param(spec, 0.5), 0.2)
        self.assertAlmostEqual(scheduled_param(spec, -1.0), 0.1)
        self.assertAlmostEqual(scheduled_param(spec, 2.0), 0.3)
        self.assertIsNone(scheduled_param({"name": "identity"}, 0.5))

    def test_noise_table(self):
        row = dict(zip(NOISE_COLUMNS, noise_table(make_bit_flip(0.2))))
        self.assertAlmostEqual(row["B1"], 0.8)
        self.assertAlmostEqual(row["B2"], 0.2)
        self.assertAlmostEqual(row["chi"], 0.6)
        self.assertEqual(row["class"], "flip")
        degenerate = noise_table(make_depolarizing(1.0))
        self.assertEqual(degenerate[-1], "degenerate")
        self.assertTrue(math.isnan(degenerate[5]))


class ExecuteTests(TempDirTestCase):
    def test_exact_waveform_round_trip(self):
        waveform = sine_waveform(10_000)
        emit_waveform(waveform, self.tmp / "wave.csv")
        outcome = self.run_config(base_config(signal={"waveform": str(self.tmp / "wave.csv")}))
        retrieved = ingest_waveform(outcome.output_dir / "retrieved.csv")
        np.testing.assert_array_equal(retrieved.t, waveform.t)
        np.testing.assert_allclose(retrieved.phi, waveform.phi, rtol=0, atol=1e-12)
        summary = json.loads((outcome.output_dir / "summary.json").read_text())
        self.assertEqual(summary["samples"], 10_000)
        self.assertLess(summary["d_mse_waveform"], 1e-24)
        self.assertEqual(summary["f_t"], 1.0)
        self.assertTrue(summary["exact"])
        self.assertEqual(summary["mode"], "single")

    def test_summary_document(self):
        data = base_config()
        outcome = self.run_config(data)
        summary = json.loads((outcome.output_dir / "summary.json").read_text())
        self.assertEqual(summary["config_hash"], config_hash(data))
        for key in ("d_mse", "f_t", "gamma", "mean_phi_tilde", "var_phi_tilde", "trials", "undecodable",
                    "chi", "upsilon", "d_mse_waveform", "seed"):
            self.assertIn(key, summary)
        self.assertEqual(summary["chi"], 1.0)
        self.assertEqual([path.name for path in outcome.files], ["retrieved.csv", "samples.csv", "summary.json"])

    def test_samples_table(self):
        outcome = self.run_config(base_config(sampling={"total_photons": 100_000, "trials": 4, "seed": 3}))
        lines = (outcome.output_dir / "samples.csv").read_text().splitlines()
        self.assertEqual(lines[0], ",".join(SAMPLE_COLUMNS + RUN_COLUMNS))
        fields = lines[1].split(",")
        self.assertEqual(fields[SAMPLE_COLUMNS.index("param")], "")
        self.assertEqual(fields[SAMPLE_COLUMNS.index("decodable")], "4")
        self.assertEqual(outcome.summary["trials"], 4)

    def test_sampled_runs_repeat_byte_for_byte(self):
        data = base_config(sampling={"total_photons": 100_000, "trials": 10, "seed": 99})
        first = self.run_config(data, "first")
        second = self.run_config(data, "second")
        for name in ("retrieved.csv", "samples.csv", "summary.json"):
            self.assertEqual((first.output_dir / name).read_bytes(), (second.output_dir / name).read_bytes())
        third = self.run_config(base_config(sampling={"total_photons": 100_000, "trials": 10, "seed": 100}), "third")
        self.assertNotEqual(
            (first.output_dir / "retrieved.csv").read_bytes(), (third.output_dir / "retrieved.csv").read_bytes()
        )

    def test_scheduled_dephasing_is_cancelled(self):
        waveform = sine_waveform(11)
        emit_waveform(waveform, self.tmp / "wave.csv")
        data = base_config(
            channel={"name": "phase_flip", "schedule": [[0.0, 0.0], [1.0, 0.4]]},
            signal={"waveform": str(self.tmp / "wave.csv")},
        )
        outcome = self.run_config(data)
        retrieved = ingest_waveform(outcome.output_dir / "retrieved.csv")
        np.testing.assert_allclose(retrieved.phi, waveform.phi, rtol=0, atol=1e-12)
        lines = (outcome.output_dir / "samples.csv").read_text().splitlines()
        middle = lines[6].split(",")
        self.assertAlmostEqual(float(middle[SAMPLE_COLUMNS.index("param")]), 0.2, delta=1e-12)

    def test_epr_run(self):
        data = base_config(
            mode="epr",
            channel_r={"name": "identity"},
            channel_s={"name": "bit_flip", "param": 0.1},
            correction="bit_flip",
            bases={"epsilon": 0.05, "extended": True},
            ensemble={"components": [[1.0, math.pi / 3]]},
        )
        del data["channel"]
        outcome = self.run_config(data)
        self.assertAlmostEqual(outcome.summary["mean_phi_tilde"], 0.01, delta=1e-12)
        self.assertAlmostEqual(outcome.summary["chi"], 0.8, delta=1e-12)

    def test_failure_reports_the_sample(self):
        data = base_config(channel={"name": "depolarizing", "param": 1.0})
        with self.assertRaises(NoDataError) as ctx:
            self.run_config(data)
        self.assertEqual(ctx.exception.sample_index, 0)

    def test_out_of_regime_sample(self):
        with self.assertRaises(OutOfRegimeError):
            self.run_config(base_config(signal={"phi": 0.35}))

    def test_channel_info_for_both_arms(self):
        data = {
            "mode": "channel-info",
            "channel_r": {"name": "phase_damping", "param": 0.5},
            "channel_s": {"name": "bit_phase_flip", "param": 0.2},
        }
        outcome = self.run_config(data)
        lines = (outcome.output_dir / "noise_params.csv").read_text().splitlines()
        self.assertEqual(lines[0], ",".join(NOISE_COLUMNS + RUN_COLUMNS))
        self.assertEqual(len(lines), 3)
        self.assertTrue(lines[1].startswith("phase_damping(0.5),"))
        self.assertTrue(lines[2].endswith(f",flip,{outcome.config_hash},"))
        self.assertIsNone(outcome.summary["seed"])
        self.assertEqual(len(outcome.summary["channels"]), 2)

    def test_sweep_table(self):
        data = base_config(
            mode="sweep",
            channel={"name": "phase_damping", "param": 0.5},
            sampling={"total_photons": 1, "trials": 10, "seed": 5},
            sweep={"total_photons": [10_000, 100_000], "epsilon": [0.05], "param": [0.3, 1.5]},
        )
        outcome = self.run_config(data)
        lines = (outcome.output_dir / "sweep.csv").read_text().splitlines()
        self.assertEqual(lines[0], ",".join(SWEEP_COLUMNS + RUN_COLUMNS))
        self.assertEqual(len(lines), 5)
        failed = lines[2].split(",")
        self.assertEqual(failed[SWEEP_COLUMNS.index("d_mse")], "")
        self.assertIn("lambda", lines[2])
        self.assertEqual(outcome.summary["points"], 4)
        self.assertEqual(outcome.summary["failed_points"], 2)

    def test_tables_carry_the_run_identity(self):
        runs = {
            "samples.csv": base_config(sampling={"total_photons": 100_000, "trials": 3, "seed": 2 ** 64 - 1}),
            "sweep.csv": base_config(
                mode="sweep",
                channel={"name": "phase_damping", "param": 0.5},
                sampling={"trials": 5, "seed": 21},
                sweep={"total_photons": [10_000], "epsilon": [0.05], "param": [0.3, 1.5]},
            ),
        }
        for name, data in runs.items():
            outcome = self.run_config(data, name)
            with (outcome.output_dir / name).open(newline="") as handle:
                header, *rows = list(csv.reader(handle))
            self.assertEqual(header[-2:], RUN_COLUMNS)
            self.assertTrue(rows)
            for row in rows:
                self.assertEqual(row[-2:], [config_hash(data), str(data["sampling"]["seed"])])

    def test_sweep_files_repeat_byte_for_byte(self):
        data = base_config(
            mode="sweep",
            channel={"name": "phase_damping", "param": 0.5},
            sampling={"trials": 25, "seed": 8},
            sweep={"total_photons": [10_000, 100_000], "epsilon": [0.05, 0.1], "param": [0.2, 0.5],
                   "gamma": [None, 1e-5]},
        )
        first = self.run_config(data, "first")
        second = self.run_config(data, "second")
        for name in ("sweep.csv", "summary.json"):
            self.assertEqual((first.output_dir / name).read_bytes(), (second.output_dir / name).read_bytes())
        self.assertEqual(len((first.output_dir / "sweep.csv").read_text().splitlines()), 17)
