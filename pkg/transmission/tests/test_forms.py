import json
import math
import tempfile
from pathlib import Path

from django.conf import settings
from django.test import SimpleTestCase

from transmission.exceptions import ConfigError
from transmission.forms import load_config, validate_config


def single_config(**overrides):
    config = {
        "mode": "single",
        "ensemble": {"components": [[1.0, math.pi / 2]]},
        "channel": {"name": "phase_damping", "param": 0.5},
        "bases": {"epsilon": 0.05},
        "sampling": {"total_photons": 10000, "trials": 20},
        "signal": {"phi": 0.01},
    }
    config.update(overrides)
    return config


class ValidateConfigTests(SimpleTestCase):
    def assertRejected(self, data, field_path):
        with self.assertRaises(ConfigError) as ctx:
            validate_config(data)
        self.assertEqual(ctx.exception.field_path, field_path)
        return ctx.exception

    def test_defaults(self):
        config = validate_config(single_config())
        self.assertEqual(config["correction"], "none")
        self.assertEqual(config["gamma_multiple"], 3.0)
        self.assertIsNone(config["gamma"])
        self.assertEqual(config["bases"]["axis"], math.pi / 2)
        self.assertFalse(config["bases"]["extended"])
        self.assertEqual(config["sampling"]["seed"], settings.PHASEGUARD["DEFAULT_SEED"])
        self.assertFalse(config["sampling"]["exact"])
        self.assertEqual(config["ensemble"]["components"], [(1.0, math.pi / 2)])

    def test_trials_default_to_one(self):
        config = validate_config(single_config(sampling={"total_photons": 100}))
        self.assertEqual(config["sampling"]["trials"], 1)

    def test_full_seed_range(self):
        config = validate_config(single_config(sampling={"total_photons": 100, "seed": 2 ** 64 - 1}))
        self.assertEqual(config["sampling"]["seed"], 2 ** 64 - 1)
        self.assertRejected(single_config(sampling={"total_photons": 100, "seed": 2 ** 64}), "sampling.seed")

    def test_unknown_keys(self):
        self.assertRejected(single_config(colour="blue"), "colour")
        self.assertRejected(single_config(bases={"epsilon": 0.05, "tilt": 1}), "bases.tilt")

    def test_invalid_mode(self):
        self.assertRejected(single_config(mode="broadcast"), "mode")

    def test_missing_section(self):
        data = single_config()
        del data["signal"]
        self.assertRejected(data, "signal")

    def test_epsilon_range(self):
        for epsilon in (0.0, -0.01, 0.25):
            self.assertRejected(single_config(bases={"epsilon": epsilon}), "bases.epsilon")

    def test_section_must_be_an_object(self):
        self.assertRejected(single_config(bases=[0.05]), "bases")

    def test_ensemble_components(self):
        self.assertRejected(single_config(ensemble={"components": []}), "ensemble.components")
        self.assertRejected(single_config(ensemble={"components": [[1.0]]}), "ensemble.components")
        self.assertRejected(single_config(ensemble={"components": [[1.0, "pi"]]}), "ensemble.components")

    def test_channel_requirements(self):
        self.assertRejected(single_config(channel={"name": "bit_flip"}), "channel.param")
        self.assertRejected(single_config(channel={"name": "bit_flip", "param": 1.5}), "channel.param")
        self.assertRejected(single_config(channel={"name": "rtn", "nu": 1.0, "coupling": 0.5}), "channel.t")
        self.assertRejected(single_config(channel={"name": "custom"}), "channel.path")
        self.assertRejected(single_config(channel={"name": "teleporter", "param": 0.1}), "channel.name")
        validate_config(single_config(channel={"name": "identity"}))

    def test_schedule(self):
        config = validate_config(single_config(channel={"name": "phase_flip", "schedule": [[0, 0.1], [1, 0.3]]}))
        self.assertEqual(config["channel"]["schedule"], [(0.0, 0.1), (1.0, 0.3)])
        self.assertRejected(
            single_config(channel={"name": "phase_flip", "schedule": [[1, 0.1], [0, 0.3]]}), "channel.schedule"
        )
        self.assertRejected(
            single_config(channel={"name": "phase_flip", "schedule": [[0, 0.1], [1, 1.3]]}), "channel.schedule"
        )
        self.assertRejected(
            single_config(channel={"name": "identity", "schedule": [[0, 0.1], [1, 0.3]]}), "channel.schedule"
        )

    def test_signal_needs_exactly_one_source(self):
        self.assertRejected(single_config(signal={}), "signal")
        self.assertRejected(single_config(signal={"phi": 0.01, "waveform": "wave.csv"}), "signal")

    def test_sampling(self):
        self.assertRejected(single_config(sampling={"trials": 3}), "sampling.total_photons")
        validate_config(single_config(sampling={"exact": True}))
        self.assertRejected(single_config(sampling={"total_photons": 0}), "sampling.total_photons")
        self.assertRejected(single_config(sampling={"total_photons": 10.5}), "sampling.total_photons")
        self.assertRejected(
            single_config(sampling={"total_photons": 100, "allocation": [0.5, 0.6]}), "sampling.allocation"
        )

    def test_correction_needs_extended_bases(self):
        self.assertRejected(single_config(correction="bit_flip"), "bases.extended")
        config = validate_config(single_config(correction="auto", bases={"epsilon": 0.05, "extended": True}))
        self.assertEqual(config["correction"], "auto")
        self.assertRejected(single_config(correction="magic"), "correction")

    def test_gamma(self):
        self.assertEqual(validate_config(single_config(gamma=1e-6))["gamma"], 1e-6)
        self.assertRejected(single_config(gamma=0), "gamma")
        self.assertRejected(single_config(gamma_multiple=-1), "gamma_multiple")

    def test_epr_arms(self):
        data = single_config(mode="epr")
        del data["channel"]
        self.assertRejected(dict(data, channel_r={"name": "identity"}), "channel_s")
        config = validate_config(dict(data, channel_r={"name": "identity"}, channel_s={"name": "bit_flip", "param": 0.1}))
        self.assertEqual(config["channel_s"]["param"], 0.1)
        validate_config(single_config(mode="epr"))

    def test_epr_needs_an_explicit_flip_kind(self):
        data = single_config(mode="epr", correction="auto", bases={"epsilon": 0.05, "extended": True})
        self.assertRejected(data, "correction")

    def test_arm_channels_outside_epr(self):
        self.assertRejected(single_config(channel_r={"name": "identity"}), "channel_r")

    def test_channel_info(self):
        config = validate_config({"mode": "channel-info", "channel": {"name": "bit_flip", "param": 0.2}})
        self.assertIsNone(config.get("sampling"))
        self.assertRejected({"mode": "channel-info"}, "channel")

    def test_sweep(self):
        grid = {"total_photons": [1000, 10000], "epsilon": [0.05], "param": [0.1, 0.2]}
        config = validate_config(single_config(mode="sweep", sweep=grid))
        self.assertEqual(config["sweep"]["gamma"], [None])
        self.assertEqual(config["sweep"]["total_photons"], [1000, 10000])
        config = validate_config(single_config(mode="sweep", sweep=dict(grid, gamma=[None, 1e-6])))
        self.assertEqual(config["sweep"]["gamma"], [None, 1e-6])
        self.assertRejected(single_config(mode="sweep", sweep=dict(grid, gamma=[-1.0])), "sweep.gamma")
        self.assertRejected(single_config(mode="sweep", sweep=dict(grid, epsilon=[0.3])), "sweep.epsilon")
        self.assertRejected(single_config(mode="sweep", sweep=dict(grid, total_photons=[])), "sweep.total_photons")
        self.assertRejected(
            single_config(mode="sweep", sweep=grid, signal={"waveform": "wave.csv"}), "signal.waveform"
        )

    def test_message_carries_the_path(self):
        exc = self.assertRejected(single_config(bases={"epsilon": 0.5}), "bases.epsilon")
        self.assertTrue(str(exc).startswith("bases.epsilon: "))


class LoadConfigTests(SimpleTestCase):
    def test_reads_a_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "run.json"
            path.write_text(json.dumps(single_config()))
            raw, config = load_config(path)
        self.assertEqual(raw["mode"], "single")
        self.assertEqual(config["channel"]["param"], 0.5)

    def test_missing_file(self):
        with self.assertRaises(ConfigError) as ctx:
            load_config("/nonexistent/run.json")
        self.assertEqual(ctx.exception.field_path, "")

    def test_invalid_json(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "run.json"
            path.write_text("{mode: single")
            with self.assertRaises(ConfigError) as ctx:
                load_config(path)
        self.assertIn("not valid JSON", str(ctx.exception))
