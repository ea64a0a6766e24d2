import numpy as np
import pytest

from crosscam.embeddings import Embedding, Observation, normalize_parts


def make_embedding(*parts) -> Embedding:
    """Embedding from already-unit-norm part tuples."""
    arr = np.asarray(parts, dtype=np.float64)
    return Embedding(vector=arr.reshape(-1), parts=arr.shape[0], dim=arr.shape[1])


def make_obs(obs_id, camera, *parts, person=None, t=0.0) -> Observation:
    return Observation(obs_id=obs_id, person_id=person, camera=camera,
                       timestamp=t, embedding=make_embedding(*parts))


def random_observation(rng, obs_id, camera, person, parts=2, dim=4, t=0.0):
    emb = normalize_parts(rng.standard_normal((parts, dim)))
    return Observation(obs_id=obs_id, person_id=person, camera=camera,
                       timestamp=t, embedding=emb)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
