import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_obs
from crosscam.errors import (
    DegenerateDataError,
    UndefinedRowError,
    UnknownCameraError,
    ValidationError,
)
from crosscam.graph import load_graph
from crosscam.transition import (
    Trajectory,
    Visit,
    entry_exit_stats,
    estimate,
    export_matrix,
    extract_trajectories,
    parse_matrix,
)

PART = (1.0, 0.0)


def _obs(obs_id, person, camera, t):
    return make_obs(obs_id, camera, PART, person=person, t=t)


def _leg(person, *cameras, start=0.0):
    visits = [Visit(cam, start + i, start + i) for i, cam in enumerate(cameras)]
    return Trajectory(person, tuple(visits))


class TestExtractTrajectories:
    def test_same_camera_runs_collapse(self):
        obs = [_obs("a", "p1", "C1", 1.0), _obs("b", "p1", "C1", 2.0),
               _obs("c", "p1", "C2", 5.0)]
        (traj,) = extract_trajectories(obs)
        assert [v.camera for v in traj.visits] == ["C1", "C2"]
        assert traj.visits[0] == Visit("C1", 1.0, 2.0)

    def test_single_camera_gives_length_one(self):
        obs = [_obs("a", "p1", "C1", 1.0), _obs("b", "p1", "C1", 9.0)]
        (traj,) = extract_trajectories(obs)
        assert len(traj.visits) == 1

    def test_interleaved_identities(self):
        # Hand sort: p1 sees C1(2), C2(4), C1(6); p2 sees C2(1), C3(3..5).
        obs = [_obs("a", "p2", "C2", 1.0), _obs("b", "p1", "C1", 2.0),
               _obs("c", "p2", "C3", 3.0), _obs("d", "p1", "C2", 4.0),
               _obs("e", "p2", "C3", 5.0), _obs("f", "p1", "C1", 6.0)]
        p1, p2 = extract_trajectories(obs)
        assert p1.person_id == "p1"
        assert [v.camera for v in p1.visits] == ["C1", "C2", "C1"]
        assert [v.camera for v in p2.visits] == ["C2", "C3"]
        assert p2.visits[1] == Visit("C3", 3.0, 5.0)

    def test_unlabeled_observation_rejected(self):
        with pytest.raises(ValidationError):
            extract_trajectories([make_obs("a", "C1", PART, t=0.0)])

    @settings(max_examples=30)
    @given(st.permutations(list(range(6))))
    def test_input_order_invariance(self, order):
        base = [_obs("a", "p2", "C2", 1.0), _obs("b", "p1", "C1", 2.0),
                _obs("c", "p2", "C3", 3.0), _obs("d", "p1", "C2", 4.0),
                _obs("e", "p2", "C3", 5.0), _obs("f", "p1", "C1", 6.0)]
        shuffled = [base[i] for i in order]
        assert extract_trajectories(shuffled) == extract_trajectories(base)


class TestEstimate:
    def test_direct_proportions(self):
        g = load_graph("C1 C2\nC1 C3")
        trajectories = [_leg("a", "C1", "C2"), _leg("b", "C1", "C2"),
                        _leg("c", "C1", "C2"), _leg("d", "C1", "C3")]
        model = estimate(g, trajectories)
        assert model.counts["C1"] == {"C2": 3, "C3": 1}
        assert model.prob("C1", "C2") == pytest.approx(0.75)
        assert model.prob("C1", "C3") == pytest.approx(0.25)

    def test_single_neighbor_row_is_one(self):
        g = load_graph("C1 C2")
        model = estimate(g, [_leg("a", "C1", "C2")] * 5)
        assert model.prob("C1", "C2") == 1.0

    def test_smoothing_gives_uniform_on_empty(self):
        g = load_graph("C1 C2\nC1 C3")
        model = estimate(g, [], smoothing=1.0)
        assert model.prob("C1", "C2") == pytest.approx(0.5)
        assert model.prob("C1", "C3") == pytest.approx(0.5)

    def test_zero_counts_without_smoothing_is_undefined(self):
        g = load_graph("C1 C2")
        model = estimate(g, [])
        assert not model.row_defined("C1")
        with pytest.raises(UndefinedRowError):
            model.prob("C1", "C2")

    def test_non_adjacent_transitions_become_diagnostics(self):
        g = load_graph("C1 C2\nC2 C3")
        model = estimate(g, [_leg("a", "C1", "C3")])
        assert model.non_adjacent == {("C1", "C3"): 1}
        assert model.counts["C1"] == {"C2": 0}

    def test_unknown_camera_rejected(self):
        g = load_graph("C1 C2")
        with pytest.raises(UnknownCameraError):
            estimate(g, [_leg("a", "C1", "C9")])

    def test_negative_smoothing_rejected(self):
        g = load_graph("C1 C2")
        with pytest.raises(ValidationError):
            estimate(g, [], smoothing=-0.1)

    def test_monotone_in_counts(self):
        g = load_graph("C1 C2\nC1 C3")
        low = estimate(g, [_leg("a", "C1", "C2")] * 2 + [_leg("b", "C1", "C3")] * 3)
        high = estimate(g, [_leg("a", "C1", "C2")] * 3 + [_leg("b", "C1", "C3")] * 3)
        assert high.prob("C1", "C2") > low.prob("C1", "C2")

    def test_prob_is_zero_for_non_adjacent_pair(self):
        g = load_graph("C1 C2\nC2 C3")
        model = estimate(g, [_leg("a", "C1", "C2")])
        assert model.prob("C1", "C3") == 0.0

    @settings(max_examples=80)
    @given(st.lists(st.integers(0, 30), min_size=3, max_size=3),
           st.sampled_from([0.0, 0.5, 1.0, 2.0]))
    def test_rows_are_stochastic(self, counts, alpha):
        g = load_graph("C0 C1\nC0 C2\nC0 C3")
        trajectories = []
        for dest, count in zip(("C1", "C2", "C3"), counts):
            trajectories.extend(_leg(f"{dest}{i}", "C0", dest)
                                for i in range(count))
        model = estimate(g, trajectories, smoothing=alpha)
        if model.row_defined("C0"):
            total = sum(model.probs["C0"].values())
            assert total == pytest.approx(1.0, abs=1e-9)


class TestEntryExitStats:
    def test_entry_and_exit_cameras(self):
        stats = entry_exit_stats([_leg("a", "C1", "C2", "C3")])
        assert stats.per_camera["C1"] == (1, 0)
        assert stats.per_camera["C3"] == (0, 1)
        assert stats.per_camera["C2"] == (0, 0)

    def test_single_visit_enters_and_exits_same_camera(self):
        stats = entry_exit_stats([_leg("a", "C2")])
        assert stats.per_camera["C2"] == (1, 1)

    def test_entry_counting(self):
        stats = entry_exit_stats([_leg("a", "C1", "C2"), _leg("b", "C1", "C3"),
                                  _leg("c", "C1", "C2")])
        assert stats.per_camera["C1"] == (3, 0)

    def test_per_day_buckets_by_first_seen_utc(self):
        t_day0 = 100.0
        t_day1 = 86400.0 + 100.0
        stats = entry_exit_stats([_leg("a", "C1", "C2", start=t_day0),
                                  _leg("b", "C1", "C2", start=t_day0 + 50),
                                  _leg("c", "C2", "C1", start=t_day1)])
        assert stats.per_day == {"1970-01-01": 2, "1970-01-02": 1}

    def test_empty_input_rejected(self):
        with pytest.raises(DegenerateDataError):
            entry_exit_stats([])


class TestMatrixExport:
    def test_two_camera_chain_layout(self):
        g = load_graph("C1 C2")
        trajectories = ([_leg(f"a{i}", "C1", "C2") for i in range(4)]
                        + [_leg(f"b{i}", "C2", "C1") for i in range(4)])
        text = export_matrix(estimate(g, trajectories))
        lines = text.splitlines()
        assert lines[0] == "counts"
        assert lines[1] == ",C1,C2"
        assert lines[2] == "C1,,4"
        assert lines[3] == "C2,4,"
        assert lines[4] == "probabilities"
        assert lines[6] == "C1,,1.000000"
        assert lines[7] == "C2,1.000000,"

    def test_undefined_row_prints_empty_probability_cells(self):
        g = load_graph("C1 C2")
        text = export_matrix(estimate(g, [_leg("a", "C1", "C2")]))
        lines = text.splitlines()
        assert lines[2] == "C1,,1"
        assert lines[3] == "C2,0,"
        assert lines[6] == "C1,,1.000000"
        assert lines[7] == "C2,"  # no mass ever left C2

    def test_round_trip_recovers_probabilities(self):
        g = load_graph("C1 C2\nC2 C3\nC3 C1")
        trajectories = [_leg("a", "C1", "C2", "C3"), _leg("b", "C2", "C1"),
                        _leg("c", "C3", "C2", "C1"), _leg("d", "C1", "C3")]
        model = estimate(g, trajectories, smoothing=0.5)
        parsed = parse_matrix(export_matrix(model), g)
        assert parsed.counts == {c: dict(model.counts[c]) for c in g.cameras}
        for cam in g.cameras:
            for n in g.neighbors(cam):
                assert parsed.prob(cam, n) == pytest.approx(
                    model.prob(cam, n), abs=1e-6)

    def test_round_trip_preserves_undefined_rows(self):
        g = load_graph("C1 C2")
        model = estimate(g, [_leg("a", "C1", "C2")])
        parsed = parse_matrix(export_matrix(model), g)
        assert parsed.undefined == ("C2",)

    def test_parse_rejects_reordered_cameras(self):
        g = load_graph("C1 C2")
        other = load_graph("C2 C1")
        text = export_matrix(estimate(g, [_leg("a", "C1", "C2")]))
        with pytest.raises(ValidationError):
            parse_matrix(text, other)
