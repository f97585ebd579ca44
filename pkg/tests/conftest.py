import numpy as np
import pytest

from fashionkb.corpus import BoundingBox, GarmentRegion, Post
from fashionkb.vocab import AttributeType, ConceptVocabulary, reference_vocabulary


@pytest.fixture(scope="session")
def vocab():
    return reference_vocabulary()


@pytest.fixture(scope="session")
def tiny_vocab():
    return ConceptVocabulary(
        occasions=("o1", "o2", "o3"),
        categories=("c1", "c2", "c3", "c4"),
        attributes=(
            AttributeType("a1", ("v1", "v2", "v3")),
            AttributeType("a2", ("w1", "w2")),
        ),
    )


def make_post(
    post_id="p1",
    faces=((BoundingBox(480, 140, 110, 130), 0.95),),
    bodies=((BoundingBox(370, 100, 340, 900), 0.9),),
    n_garments=1,
    d_img=8,
    d_reg=8,
    hashtags=("prom",),
    likes=100,
    comments=5,
    timestamp=1546300800,
    location="paris",
    gender_hint="female",
    caption="a look",
    seed=0,
):
    rng = np.random.default_rng(seed)
    garments = tuple(
        GarmentRegion(
            region_id=f"r{i}",
            box=BoundingBox(400, 220 + 300 * i, 260, 280),
            feature=rng.normal(size=d_reg),
        )
        for i in range(n_garments)
    )
    return Post(
        post_id=post_id,
        image_width=1080,
        image_height=1350,
        caption=caption,
        hashtags=tuple(hashtags),
        timestamp=timestamp,
        location=location,
        likes=likes,
        comments=comments,
        faces=tuple(faces),
        bodies=tuple(bodies),
        garments=garments,
        gender_hint=gender_hint,
        image_feature=rng.normal(size=d_img),
    )
