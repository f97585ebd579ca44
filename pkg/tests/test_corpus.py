import json

import numpy as np
import pytest

from fashionkb.corpus import (
    BoundingBox,
    CorpusError,
    GarmentLabels,
    LabeledPost,
    post_to_record,
    read_corpus,
    write_corpus,
)
from fashionkb.synthetic import SyntheticConfig, generate_synthetic

from conftest import make_post


def _equal_posts(a, b) -> bool:
    ra, rb = json.dumps(post_to_record(a), sort_keys=True), json.dumps(
        post_to_record(b), sort_keys=True
    )
    return ra == rb


class TestRoundTrip:
    def test_write_read_identity(self, tmp_path, tiny_vocab):
        """Field-for-field round trip, feature vectors bit-exact."""
        cfg = SyntheticConfig.default(tiny_vocab, n_posts=25, seed=11, weak_fraction=0.4,
                                      d_img=16, d_reg=12)
        posts, _ = generate_synthetic(cfg)
        path = tmp_path / "corpus.jsonl"
        assert write_corpus(posts, path) == 25
        loaded = read_corpus(path)
        assert len(loaded) == 25
        for orig, back in zip(posts, loaded):
            assert isinstance(back, LabeledPost)
            assert _equal_posts(orig, back)
            # bit-exact feature round trip
            assert np.array_equal(orig.post.image_feature, back.post.image_feature)
            for g_orig, g_back in zip(orig.post.garments, back.post.garments):
                assert np.array_equal(g_orig.feature, g_back.feature)

    def test_double_round_trip_bytes_identical(self, tmp_path, tiny_vocab):
        cfg = SyntheticConfig.default(tiny_vocab, n_posts=10, seed=3, d_img=8, d_reg=8)
        posts, _ = generate_synthetic(cfg)
        p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        write_corpus(posts, p1)
        write_corpus(read_corpus(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_unlabeled_posts_stay_unlabeled(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_corpus([make_post()], path)
        [back] = read_corpus(path)
        assert not isinstance(back, LabeledPost)


class TestSchemaErrors:
    def test_missing_post_id_names_line(self, tmp_path):
        path = tmp_path / "c.jsonl"
        record = post_to_record(make_post())
        del record["post_id"]
        good = json.dumps(post_to_record(make_post(post_id="ok")))
        path.write_text(good + "\n" + json.dumps(record) + "\n")
        with pytest.raises(CorpusError, match="line 2"):
            read_corpus(path)

    def test_invalid_json_names_line(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text("{broken\n")
        with pytest.raises(CorpusError, match="line 1"):
            read_corpus(path)

    def test_image_feature_dim_mismatch(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_corpus([make_post(post_id="a", d_img=64), make_post(post_id="b", d_img=32)], path)
        with pytest.raises(CorpusError, match="dimension mismatch"):
            read_corpus(path)

    def test_duplicate_post_id_rejected(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_corpus([make_post(post_id="a"), make_post(post_id="a")], path)
        with pytest.raises(CorpusError, match="duplicate post_id"):
            read_corpus(path)

    def test_degenerate_box_rejected(self):
        with pytest.raises(CorpusError):
            BoundingBox(0, 0, 0, 10)

    def test_box_outside_image_bounds_rejected(self):
        with pytest.raises(CorpusError, match="outside image bounds"):
            make_post(faces=((BoundingBox(1000, 100, 200, 100), 0.9),))  # x2 = 1200 > 1080

    def test_bad_label_source_rejected(self):
        post = make_post()
        with pytest.raises(CorpusError, match="clean|weak"):
            LabeledPost(
                post=post,
                occasion_label="prom",
                garment_labels={"r0": GarmentLabels("dress", {})},
                label_source="guessed",
            )

    def test_unlabeled_region_rejected(self):
        post = make_post(n_garments=2)
        with pytest.raises(CorpusError, match="unlabeled regions"):
            LabeledPost(
                post=post,
                occasion_label="prom",
                garment_labels={"r0": GarmentLabels("dress", {})},
                label_source="clean",
            )
