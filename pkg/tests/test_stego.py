import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semsteg.codec import CodecConfig
from semsteg.errors import ConfigurationError, ShapeError
from semsteg.harness.data import make_pairs, synth_dataset
from semsteg.numerics import Rng, Tensor, power_normalize
from semsteg.stego import (
    CnnStego,
    GanStego,
    InnStego,
    StegoConfig,
    StegoLossWeights,
    StegoModel,
    StegoTrainConfig,
    adversarial_losses,
    binary_cross_entropy,
    generator_loss,
    haar_dwt,
    highfreq_preprocess,
    inn_forward,
    inn_inverse,
    inverse_haar,
    rescale_unit,
    stego_loss,
    train_stego,
)

FSHAPE = (8, 8, 8)


def identity_inn():
    return InnStego.from_subnets((1, 1, 1), [(lambda x: x, lambda x: x)])


def randomized(module, seed, scale=0.3):
    g = np.random.default_rng(seed)
    for p in module.parameters():
        p.data = g.standard_normal(p.shape) * scale
    return module


class TestInn:
    def test_hand_forward(self):
        stego, aux = inn_forward(identity_inn(), np.array([[[1.0]]]), np.array([[[2.0]]]))
        assert stego.data.item() == 3.0 and aux.data.item() == 5.0

    def test_hand_inverse(self):
        cover, secret = inn_inverse(identity_inn(), np.array([[[3.0]]]), np.array([[[5.0]]]))
        assert cover.data.item() == 1.0 and secret.data.item() == 2.0

    def test_zero_init_is_identity(self):
        inn = InnStego(FSHAPE, rng=Rng(0))
        g = np.random.default_rng(0)
        c, s = g.standard_normal(FSHAPE), g.standard_normal(FSHAPE)
        stego, aux = inn.forward(c, s)
        assert np.array_equal(stego.data, c) and np.array_equal(aux.data, s)

    def test_zero_init_receive_returns_aux_sample(self):
        inn = InnStego(FSHAPE, rng=Rng(0))
        y = np.random.default_rng(1).standard_normal(FSHAPE)
        cover, secret = inn.receive(y, Rng(5))
        assert np.array_equal(cover.data, y)
        assert np.array_equal(secret.data, Rng(5).normal(FSHAPE))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**31))
    def test_inverse_of_forward(self, seed):
        inn = randomized(InnStego(FSHAPE, StegoConfig(width=8), rng=Rng(seed)), seed)
        g = np.random.default_rng(seed)
        c, s = g.standard_normal((2,) + FSHAPE), g.standard_normal((2,) + FSHAPE)
        stego, aux = inn.forward(c, s)
        rc, rs = inn.inverse(stego.data, aux.data)
        assert np.max(np.abs(rc.data - c)) < 1e-6
        assert np.max(np.abs(rs.data - s)) < 1e-6

    def test_shape_mismatch(self):
        inn = InnStego(FSHAPE, rng=Rng(0))
        with pytest.raises(ShapeError):
            inn.forward(np.zeros((4, 8, 8)), np.zeros(FSHAPE))

    def test_embed_is_power_normalized(self):
        inn = randomized(InnStego(FSHAPE, rng=Rng(0)), 2)
        g = np.random.default_rng(2)
        stego, _ = inn.embed_features(g.standard_normal(FSHAPE), g.standard_normal(FSHAPE))
        assert stego.shape == FSHAPE
        assert abs(np.mean(stego.data**2) - 1.0) < 1e-9


class TestCnnGan:
    def test_zero_init_gives_normalized_cover(self):
        net = CnnStego(FSHAPE, rng=Rng(0))
        g = np.random.default_rng(3)
        c, s = g.standard_normal(FSHAPE) * 2, g.standard_normal(FSHAPE)
        assert np.array_equal(net.embed_raw(c, s).data, c)
        np.testing.assert_array_equal(net.embed(c, s).data, power_normalize(c).data)

    def test_extract_shapes_and_determinism(self):
        net = CnnStego(FSHAPE, rng=Rng(0))
        y = np.random.default_rng(4).standard_normal(FSHAPE)
        a1, b1 = net.extract(y)
        a2, b2 = net.extract(y)
        assert a1.shape == FSHAPE and b1.shape == FSHAPE
        assert np.array_equal(a1.data, a2.data) and np.array_equal(b1.data, b2.data)

    def test_discriminator_scores_in_unit_interval(self):
        gan = GanStego(FSHAPE, (1, 32, 32), rng=Rng(0))
        g = np.random.default_rng(5)
        f = gan.discriminate("feature", g.standard_normal((4,) + FSHAPE) * 3).data
        i = gan.discriminate("image", g.uniform(size=(4, 1, 32, 32))).data
        for scores in (f, i):
            assert np.all((scores > 0) & (scores < 1))
        with pytest.raises(ConfigurationError):
            gan.discriminate("pixel", f)

    def test_parameter_count_ordering(self):
        codec_cfg = CodecConfig()
        from semsteg.codec import CodecModel

        codec = CodecModel(codec_cfg, rng=Rng(0))
        counts = {v: StegoModel(v, codec, rng=Rng(0)).stego_parameter_count() for v in ("cnn", "gan", "inn")}
        assert counts["cnn"] < counts["inn"] < counts["gan"]


class TestLosses:
    def test_hand_weighted_sum(self):
        z = np.zeros((1, 1, 1, 1))
        loss = stego_loss(
            z, z, z + 0.1, z + 0.2, z + 0.3, StegoLossWeights(1.0, 2.0, 1.0),
        )
        assert loss.item() == pytest.approx(0.18, abs=1e-12)

    def test_zero_discrepancy(self):
        x = np.random.default_rng(0).uniform(size=(2, 1, 4, 4))
        assert stego_loss(x, x, x, x, x, StegoLossWeights()).item() == 0.0

    def test_linear_in_weights(self):
        g = np.random.default_rng(1)
        a = [g.uniform(size=(2, 1, 4, 4)) for _ in range(5)]
        w = StegoLossWeights(0.5, 1.5, 0.7, 0.2)
        one = stego_loss(*a, w, adv_term=0.3).item()
        two = stego_loss(*a, w.scaled(2.0), adv_term=0.3).item()
        assert two == pytest.approx(2 * one, rel=1e-12)

    def test_negative_weight_rejected(self):
        with pytest.raises(ConfigurationError):
            StegoLossWeights(conceal=-1.0)

    def test_adversarial_at_half(self):
        loss_d, loss_g = adversarial_losses(np.array([0.5]), np.array([0.5]))
        assert loss_d.item() == pytest.approx(2 * math.log(2), abs=1e-12)
        assert loss_g.item() == pytest.approx(math.log(2), abs=1e-12)

    def test_perfect_discriminator(self):
        loss_d, _ = adversarial_losses(np.array([1.0 - 1e-12]), np.array([1e-12]))
        assert loss_d.item() < 1e-6

    def test_generator_hand_value(self):
        assert generator_loss(np.array([0.9])).item() == pytest.approx(-math.log(0.9), abs=1e-12)
        assert generator_loss(np.array([0.9])).item() == pytest.approx(0.1054, abs=1e-4)

    def test_bce_labels(self):
        scores = np.array([0.8, 0.3])
        expected = -(math.log(0.8) + math.log(0.7)) / 2
        assert binary_cross_entropy(scores, [1, 0]).item() == pytest.approx(expected, abs=1e-12)


class TestHaar:
    def test_single_block(self):
        bands = haar_dwt(np.array([[1.0, 0.0], [0.0, 0.0]]))
        assert [b.item() for b in bands] == [0.5, 0.5, 0.5, 0.5]

    def test_constant_image_has_no_detail(self):
        _, lh, hl, hh = haar_dwt(np.full((1, 8, 8), 0.3))
        assert not lh.any() and not hl.any() and not hh.any()

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31))
    def test_perfect_reconstruction_and_energy(self, seed):
        x = np.random.default_rng(seed).uniform(size=(1, 16, 16))
        bands = haar_dwt(x)
        assert np.max(np.abs(inverse_haar(*bands) - x)) < 1e-12
        assert abs(sum(np.sum(b**2) for b in bands) - np.sum(x**2)) < 1e-9

    def test_odd_size_rejected(self):
        with pytest.raises(ConfigurationError):
            haar_dwt(np.zeros((1, 5, 4)))

    def test_preprocess_constant_is_half(self):
        np.testing.assert_array_equal(highfreq_preprocess(np.full((1, 8, 8), 0.7)), 0.5)

    def test_preprocess_range_and_idempotence(self):
        x = np.random.default_rng(0).uniform(size=(3, 1, 16, 16))
        once = highfreq_preprocess(x)
        assert once.min() >= 0.0 and once.max() <= 1.0
        # The output is already a rescaled detail image; a second pass only
        # removes its LL band again, which after rescale changes nothing.
        twice = highfreq_preprocess(once)
        ll, lh, hl, hh = haar_dwt(once)
        expected = rescale_unit(inverse_haar(np.zeros_like(ll), lh, hl, hh))
        assert np.max(np.abs(twice - expected)) < 1e-9
        assert np.max(np.abs(highfreq_preprocess(twice) - twice)) < 1e-9


@pytest.fixture(scope="module")
def pairs():
    return make_pairs(synth_dataset(11, 32))


class TestTraining:
    CFG = StegoTrainConfig(epochs=3, batch_size=8)

    def test_two_stage_keeps_codec_frozen(self, tiny_codec, pairs):
        before = tiny_codec.state_dict()
        train_stego("inn", "two-stage", tiny_codec, *pairs, rng=Rng(1), train=self.CFG)
        after = tiny_codec.state_dict()
        assert all(np.array_equal(before[k], after[k]) for k in before)

    def test_joint_does_not_touch_caller_codec(self, tiny_codec, pairs):
        before = tiny_codec.state_dict()
        model, _ = train_stego("cnn", "joint", tiny_codec, *pairs, rng=Rng(1), train=self.CFG)
        assert all(np.array_equal(before[k], v) for k, v in tiny_codec.state_dict().items())
        assert any(not np.array_equal(before[k], v) for k, v in model.codec.state_dict().items())

    @pytest.mark.parametrize("variant,strategy", [("inn", "two-stage"), ("cnn", "two-stage"), ("gan", "adversarial"),
                                                  ("inn", "adversarial")])
    def test_loss_decreases(self, tiny_codec, pairs, variant, strategy):
        _, history = train_stego(variant, strategy, tiny_codec, *pairs, rng=Rng(2),
                                 train=StegoTrainConfig(epochs=4, batch_size=8))
        assert history[-1] < history[0]

    def test_same_seed_same_history(self, tiny_codec, pairs):
        runs = [train_stego("gan", "adversarial", tiny_codec, *pairs, rng=Rng(3), train=self.CFG)[1] for _ in range(2)]
        assert runs[0] == runs[1]

    def test_train_stats_and_digest(self, tiny_codec, pairs):
        a, _ = train_stego("cnn", "two-stage", tiny_codec, *pairs, rng=Rng(4), train=self.CFG)
        b, _ = train_stego("inn", "two-stage", tiny_codec, *pairs, rng=Rng(4), train=self.CFG)
        assert a.train_stats["batches"] == b.train_stats["batches"] == 3 * 2
        assert a.train_stats["sample_digest"] == b.train_stats["sample_digest"]
        assert a.train_stats["macs"] > 0

    def test_dwt_option(self, tiny_codec, pairs):
        model, history = train_stego("inn", "two-stage", tiny_codec, *pairs, rng=Rng(5),
                                     train=StegoTrainConfig(epochs=1, batch_size=8), dwt_preprocess=True)
        assert model.dwt_preprocess and np.isfinite(history[0])

    def test_bad_arguments(self, tiny_codec, pairs):
        with pytest.raises(ConfigurationError):
            train_stego("rnn", "two-stage", tiny_codec, *pairs)
        with pytest.raises(ConfigurationError):
            train_stego("cnn", "sideways", tiny_codec, *pairs)
        with pytest.raises(ConfigurationError):
            train_stego("cnn", "joint", tiny_codec, pairs[0][:0], pairs[1][:0])

    def test_received_tensor_shapes(self, tiny_codec, pairs):
        model, _ = train_stego("inn", "two-stage", tiny_codec, *pairs, rng=Rng(6),
                               train=StegoTrainConfig(epochs=1, batch_size=8))
        fc = tiny_codec.encode(pairs[0][:2])
        stego, aux = model.net.embed_features(fc, tiny_codec.encode(pairs[1][:2]))
        assert stego.shape == fc.shape == aux.shape
        cover, secret = model.net.receive(Tensor(stego.data), Rng(0))
        assert cover.shape == secret.shape == fc.shape
