import numpy as np
import pytest

from forgepipe.errors import InvariantError
from forgepipe.geometry import iou
from forgepipe.synth import (
    DISTRACTOR,
    EmbeddingDatasetSpec,
    PersonSpec,
    SceneSpec,
    generate_embeddings,
    generate_scene,
    random_scene,
)

BOX = (10.0, 10.0, 30.0, 30.0)


# ------------------------------------------------------------ scenes


def test_one_person_every_frame():
    spec = SceneSpec(num_frames=50, frame_size=(96, 64), persons=(PersonSpec(start_bbox=BOX),))
    scene = generate_scene(spec)
    assert len(scene.detections) == 50
    assert all(len(d.faces) == 1 for d in scene.detections.values())
    assert scene.owners[0] == (0,)


def test_dropout_removes_detection_lines():
    spec = SceneSpec(
        num_frames=50,
        frame_size=(96, 64),
        persons=(PersonSpec(start_bbox=BOX, dropout_frames=frozenset({10, 11})),),
    )
    scene = generate_scene(spec)
    present = [t for t, d in scene.detections.items() if len(d.faces) > 0]
    assert len(present) == 48
    assert 10 not in present and 11 not in present
    # truth covers dropout frames regardless
    assert scene.truth_centers.shape == (1, 50, 2)


def test_scene_determinism():
    spec = random_scene(seed=5, index=2)
    a = generate_scene(spec)
    b = generate_scene(spec)
    np.testing.assert_array_equal(a.render_all(), b.render_all())
    assert a.owners == b.owners
    for t in a.detections:
        fa, fb = a.detections[t].faces, b.detections[t].faces
        assert len(fa) == len(fb)
        for x, y in zip(fa, fb):
            assert x.bbox == y.bbox and x.confidence == y.confidence
            np.testing.assert_array_equal(x.landmarks, y.landmarks)


def test_random_scenes_cross_person_iou_zero():
    for index in range(20):
        spec = random_scene(seed=31, index=index)
        scene = generate_scene(spec)
        P = len(spec.persons)
        for t in range(spec.num_frames):
            for i in range(P):
                for j in range(i + 1, P):
                    a = spec.persons[i].bbox_at(t)
                    b = spec.persons[j].bbox_at(t)
                    assert iou(a, b) == 0.0


def test_random_scene_dropout_spares_seed_window():
    for index in range(30):
        spec = random_scene(seed=77, index=index)
        for person in spec.persons:
            assert all(f >= 6 for f in person.dropout_frames)


def test_random_scene_distractors_cannot_seed():
    # distractors are either below the tracker threshold or absent from
    # the seed window entirely
    for index in range(30):
        spec = random_scene(seed=99, index=index)
        for d in spec.distractors:
            assert d.confidence < 0.95 or set(range(6)) <= d.dropout_frames


def test_owner_layout_persons_before_distractors():
    spec = SceneSpec(
        num_frames=8,
        frame_size=(128, 64),
        persons=(PersonSpec(start_bbox=BOX),),
        distractors=(PersonSpec(start_bbox=(80.0, 20.0, 20.0, 20.0), confidence=0.4),),
    )
    scene = generate_scene(spec)
    assert scene.owners[0] == (0, DISTRACTOR)
    faces = scene.detections[0].faces
    assert faces[0].confidence == pytest.approx(0.99)
    assert faces[1].confidence == pytest.approx(0.4)


def test_render_frame_face_patch_visible():
    spec = SceneSpec(num_frames=3, frame_size=(96, 64), persons=(PersonSpec(start_bbox=BOX),))
    scene = generate_scene(spec)
    frame = scene.render_frame(0)
    assert frame.shape == (64, 96, 3)
    assert frame.dtype == np.float32
    assert frame.min() >= 0.0 and frame.max() <= 1.0
    # background is dim noise, the face patch bright
    assert frame[25, 25].mean() > 0.25
    assert frame[5, 80].mean() < 0.06
    # nose marker at full intensity
    nose = spec.persons[0].landmarks_at(0)[2]
    assert frame[int(round(nose[1])), int(round(nose[0]))].max() == 1.0


def test_scene_rejects_out_of_range_dropout():
    with pytest.raises(InvariantError):
        SceneSpec(
            num_frames=10,
            frame_size=(64, 64),
            persons=(PersonSpec(start_bbox=BOX, dropout_frames=frozenset({10})),),
        )


def test_random_scene_person_count_bounded():
    counts = set()
    for index in range(40):
        spec = random_scene(seed=1, index=index, max_persons=3)
        counts.add(len(spec.persons))
        assert 1 <= len(spec.persons) <= 3
        assert 48 <= spec.num_frames <= 72
    assert len(counts) > 1


# ------------------------------------------------------------ embeddings


def test_embeddings_fake_count_exact():
    spec = EmbeddingDatasetSpec(
        num_videos=100, clips_per_video=2, dim_v=8, dim_a=8, separation=1.0, fake_fraction=0.3
    )
    ds = generate_embeddings(spec)
    assert int(ds.labels.sum()) == 30
    assert ds.z_v.shape == (100, 2, 8)
    assert ds.z_a.shape == (100, 2, 8)
    assert len(ds.video_ids) == 100


def test_embeddings_deterministic():
    spec = EmbeddingDatasetSpec(
        num_videos=10, clips_per_video=3, dim_v=4, dim_a=4, separation=2.0, fake_fraction=0.5, seed=9
    )
    a = generate_embeddings(spec)
    b = generate_embeddings(spec)
    np.testing.assert_array_equal(a.z_v, b.z_v)
    np.testing.assert_array_equal(a.z_a, b.z_a)
    np.testing.assert_array_equal(a.labels, b.labels)


def test_embeddings_separation_shows_in_video_means():
    spec = EmbeddingDatasetSpec(
        num_videos=200, clips_per_video=5, dim_v=16, dim_a=16, separation=10.0, fake_fraction=0.5
    )
    ds = generate_embeddings(spec)
    fake = ds.z_v[ds.labels == 1].reshape(-1, 16).mean(axis=0)
    real = ds.z_v[ds.labels == 0].reshape(-1, 16).mean(axis=0)
    assert np.linalg.norm(fake - real) == pytest.approx(10.0, rel=0.05)


def test_embeddings_audio_carries_no_class_signal():
    spec = EmbeddingDatasetSpec(
        num_videos=200, clips_per_video=5, dim_v=16, dim_a=16, separation=10.0, fake_fraction=0.5
    )
    ds = generate_embeddings(spec)
    fake = ds.z_a[ds.labels == 1].reshape(-1, 16).mean(axis=0)
    real = ds.z_a[ds.labels == 0].reshape(-1, 16).mean(axis=0)
    assert np.linalg.norm(fake - real) < 0.5


def test_embeddings_zero_separation_probe_is_chance():
    spec = EmbeddingDatasetSpec(
        num_videos=400, clips_per_video=5, dim_v=8, dim_a=8, separation=0.0, fake_fraction=0.5
    )
    ds = generate_embeddings(spec)
    clips = ds.z_v.reshape(-1, 8)
    labels = np.repeat(ds.labels, 5)
    scores = clips @ np.ones(8) / np.sqrt(8)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    greater = (pos[:, None] > neg[None, :]).mean()
    ties = (pos[:, None] == neg[None, :]).mean()
    auc = greater + 0.5 * ties
    assert abs(auc - 0.5) < 0.05


def test_embeddings_high_separation_probe_is_perfect():
    spec = EmbeddingDatasetSpec(
        num_videos=100, clips_per_video=4, dim_v=16, dim_a=16, separation=10.0, fake_fraction=0.5
    )
    ds = generate_embeddings(spec)
    clips = ds.z_v.reshape(-1, 16)
    labels = np.repeat(ds.labels, 4)
    direction = clips[labels == 1].mean(axis=0) - clips[labels == 0].mean(axis=0)
    scores = clips @ direction
    assert scores[labels == 1].min() > scores[labels == 0].max()


def test_embeddings_spec_validation():
    with pytest.raises(InvariantError):
        EmbeddingDatasetSpec(
            num_videos=0, clips_per_video=1, dim_v=4, dim_a=4, separation=1.0, fake_fraction=0.5
        )
    with pytest.raises(InvariantError):
        EmbeddingDatasetSpec(
            num_videos=10, clips_per_video=1, dim_v=4, dim_a=4, separation=-1.0, fake_fraction=0.5
        )
    with pytest.raises(InvariantError):
        EmbeddingDatasetSpec(
            num_videos=10, clips_per_video=1, dim_v=4, dim_a=4, separation=1.0, fake_fraction=1.5
        )
