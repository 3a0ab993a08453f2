import math

import pytest

from risloc.features import (
    SweepSeries,
    best_candidate,
    build_anchor_features,
    build_series,
    coarse_aod,
    fine_aod,
    isolate_mpc,
    path_distance_estimate,
)
from risloc.sage import MpcEstimate

ANGLES = [float(a) for a in range(-60, 65, 5)]

# demo-campaign sweep gains for the first UE, digitized from the reference
# campaign plots: overall channel gain and isolated-path gain per pointing
# angle, RIS1 and RIS2 scans (floor value -100 marks a missing extraction)
RIS1_OVERALL = [
    -65.3370175804534, -65.3377525049305, -65.3397006627373, -65.3525381477191,
    -65.3175689754551, -65.3172309507052, -65.3328439727983, -65.2859611184517,
    -65.3610734393938, -65.3563918675114, -65.3218005403915, -65.3374098539122,
    -64.9005885817389, -65.1164095418643, -65.2979397592376, -65.3658772266748,
    -65.2658838285465, -64.6462598798014, -64.942911656344, -65.4332553871642,
    -65.4460909492072, -65.431824247627, -65.4625726593309, -65.4583424933898,
    -65.3614024279995,
]
RIS1_RP = [
    -92.2332943960524, -93.1912578419029, -92.7834601240397, None,
    -86.4490394028049, -86.707462772233, -87.4784111396436, -86.1957096365413,
    -90.2159276390359, -88.4295715112804, -83.1276059271697, -84.5741473144506,
    -74.6045867268289, -76.9252864487692, -83.4652113094625, -86.3031944765613,
    -80.1812247417728, -72.7228382858527, -74.8772380624712, -90.9416856556111,
    -87.9907638871376, -86.1206559504228, None, -90.381772706257,
    -83.0827719387846,
]
RIS2_OVERALL = [
    -64.8378904058264, -64.8333469543456, -64.8458383811277, -64.8366315261294,
    -64.8499586348485, -64.849127467793, -64.8577633623727, -64.842294862555,
    -64.846599986623, -64.8622829504081, -64.8682500075994, -64.841334762232,
    -64.8189831234273, -64.7987151292785, -64.7686704577055, -64.8356781542648,
    -64.8055890933424, -64.8215238140438, -64.7753900295617, -64.6697171900174,
    -64.7725550289029, -64.773335532794, -64.78419458754, -64.7603480677766,
    -64.7778081547761,
]
RIS2_RP = [
    -92.2332943960524, -93.1912578419029, -92.7834601240397, None,
    -86.4490394028049, -86.707462772233, -87.4784111396436, -87.6651264699597,
    -90.2159276390359, -87.4070143330948, -83.1276059271697, -91.3729907728074,
    -74.6045867268289, -82.9259818595377, -80.7974779689225, -90.6347088007448,
    -89.5586042141593, -89.5024374028905, -85.2992143051654, -79.825456320279,
    -85.1134921641002, -89.8265729906998, None, -90.381772706257,
    -92.217389025415,
]
BS_DP = [
    -66.6435773666539, -72.8544632986689, -66.8331572771577, -66.9725815045831,
    -75.4519420853523, -68.5473492998604, -73.564876913759, -68.5249847245232,
    -72.6447183183387, -71.5839403827195, -69.9340426406617, -67.1982725697994,
    -70.3599428282743, -62.7866707824396, -68.8955053442353, -71.5809028167459,
    -64.3902559343072, -55.4640782109165, -51.7433704194662, -57.8135952974943,
    -67.5976502754891, -67.0789351546758, -67.6235061683714, -65.5207986124153,
    -66.2674792101105,
]


def series_from_gains(overall, isolated_db=None):
    if isolated_db is None:
        isolated = [None] * len(overall)
    else:
        isolated = [
            None if db is None else MpcEstimate(5.0, 0.0, 10 ** (db / 20.0))
            for db in isolated_db
        ]
    return SweepSeries(list(ANGLES), list(overall), isolated)


def mpc(d, aoa, power_db=-70.0):
    return MpcEstimate(d, aoa, 10 ** (power_db / 20.0))


class TestIsolate:
    def test_inside_window_selected(self):
        got = isolate_mpc([mpc(10.5, 40.0)], 10.0, 30.0)
        assert got is not None and got.ota_distance == 10.5

    def test_outside_distance_window(self):
        assert isolate_mpc([mpc(11.2, 30.0)], 10.0, 30.0) is None

    def test_outside_angle_window(self):
        assert isolate_mpc([mpc(10.0, 46.0)], 10.0, 30.0) is None

    def test_strongest_wins(self):
        weak = mpc(10.1, 30.0, power_db=-80.0)
        strong = mpc(10.4, 33.0, power_db=-70.0)
        assert isolate_mpc([weak, strong], 10.0, 30.0) is strong

    def test_angle_window_wraps(self):
        got = isolate_mpc([mpc(10.0, -172.0)], 10.0, 178.0)
        assert got is not None

    def test_window_soundness(self):
        import random

        rng = random.Random(2)
        for _ in range(300):
            mpcs = [mpc(rng.uniform(5, 15), rng.uniform(-180, 180)) for _ in range(6)]
            got = isolate_mpc(mpcs, 10.0, 0.0)
            if got is not None:
                assert abs(got.ota_distance - 10.0) <= 1.0
                assert abs(got.aoa_deg) <= 15.0


class TestCoarseAod:
    def test_ris1_campaign_candidates(self):
        top1, top3 = coarse_aod(series_from_gains(RIS1_OVERALL))
        assert top1 == 25.0
        assert top3 == [25.0, 0.0, 30.0]

    def test_ris2_campaign_candidates(self):
        # overall-gain ranking of the RIS2 scan puts 35/55/10 on top
        top1, top3 = coarse_aod(series_from_gains(RIS2_OVERALL))
        assert top1 == 35.0
        assert top3 == [35.0, 55.0, 10.0]

    def test_unimodal_series(self):
        gains = [-80.0 + 0.1 * a - 0.01 * a * a for a in ANGLES]
        top1, _ = coarse_aod(series_from_gains(gains))
        assert top1 == ANGLES[int(max(range(len(gains)), key=gains.__getitem__))]

    def test_tie_toward_smaller_magnitude(self):
        gains = [-90.0] * len(ANGLES)
        gains[ANGLES.index(-30.0)] = -60.0
        gains[ANGLES.index(30.0)] = -60.0
        gains[ANGLES.index(0.0)] = -60.0
        _, top3 = coarse_aod(series_from_gains(gains))
        assert top3[0] == 0.0
        assert set(top3) == {0.0, -30.0, 30.0}


class TestFineAod:
    def test_bs_campaign_top1(self):
        top1, _ = fine_aod(series_from_gains(BS_DP, BS_DP))
        assert top1 == 30.0  # ground truth is 32.0

    def test_ris1_campaign_candidates(self):
        top1, top3 = fine_aod(series_from_gains(RIS1_OVERALL, RIS1_RP))
        assert top1 == 25.0
        assert top3 == [25.0, 0.0, 30.0]

    def test_ris2_campaign_candidates(self):
        top1, top3 = fine_aod(series_from_gains(RIS2_OVERALL, RIS2_RP))
        assert top1 == 0.0
        assert top3 == [0.0, 35.0, 10.0]

    def test_single_observed_angle(self):
        isolated = [None] * len(ANGLES)
        isolated[7] = -70.0
        top1, top3 = fine_aod(series_from_gains(RIS1_OVERALL, isolated))
        assert top1 == ANGLES[7]

    def test_all_missing_raises(self):
        with pytest.raises(ValueError):
            fine_aod(series_from_gains(RIS1_OVERALL, [None] * len(ANGLES)))

    def test_missing_ranks_below_observed(self):
        isolated = [None] * len(ANGLES)
        isolated[2] = -95.0
        isolated[3] = -99.0
        _, top3 = fine_aod(series_from_gains(RIS1_OVERALL, isolated))
        assert set(top3) == {ANGLES[2], ANGLES[3]} | (set(top3) - {ANGLES[2], ANGLES[3]})
        assert top3[0] == ANGLES[2]
        assert top3[1] == ANGLES[3]


class TestBestCandidate:
    def test_ris1_case(self):
        assert best_candidate([25.0, 0.0, 30.0], 24.6) == 25.0

    def test_ris2_case(self):
        assert best_candidate([0.0, 35.0, 10.0], 31.9) == 35.0

    def test_single_candidate(self):
        assert best_candidate([40.0], -10.0) == 40.0

    def test_tie_toward_smaller_magnitude(self):
        assert best_candidate([10.0, -10.0, 50.0], 0.0) == 10.0 or best_candidate([10.0, -10.0, 50.0], 0.0) == -10.0
        # |10| == |-10|: the final tie rule picks the smaller angle value
        assert best_candidate([10.0, -10.0], 0.0) == -10.0

    def test_membership(self):
        import random

        rng = random.Random(9)
        for _ in range(200):
            cands = [rng.choice(ANGLES) for _ in range(3)]
            assert best_candidate(cands, rng.uniform(-180, 180)) in cands


class TestPathDistance:
    def test_returns_ota(self):
        assert path_distance_estimate(mpc(9.0, 0.0)) == 9.0

    def test_missing_raises(self):
        with pytest.raises(ValueError):
            path_distance_estimate(None)


class TestBuild:
    def test_series_and_features_roundtrip(self, scene):
        # one synthetic sweep where the path is isolated at two angles
        from risloc.geometry import PathSpec, aoa_at_ue, ota_distance

        ue = scene.ue_truths[0]
        d = ota_distance(scene, PathSpec("rp", 0), ue)
        aoa = aoa_at_ue(scene, PathSpec("rp", 0), ue)
        per_angle = [[] for _ in ANGLES]
        per_angle[ANGLES.index(25.0)] = [mpc(d + 0.1, aoa + 2.0, -70.0)]
        per_angle[ANGLES.index(0.0)] = [mpc(d - 0.2, aoa - 3.0, -75.0)]
        series = build_series(scene, 0, 0, ANGLES, RIS1_OVERALL, per_angle)
        assert series.isolated[ANGLES.index(25.0)] is not None
        assert series.isolated[ANGLES.index(0.0)] is not None
        feats = build_anchor_features(scene, 0, 0, series)
        assert feats.fine_top1 == 25.0
        assert feats.fine_best == 25.0
        assert feats.path_distance_m == pytest.approx(d + 0.1)
        assert feats.coarse_best == 25.0  # truth 24.58, candidates 25/0/30

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            SweepSeries([0.0, 5.0], [-60.0], [None, None])

    def test_non_increasing_angles_rejected(self):
        with pytest.raises(ValueError):
            SweepSeries([5.0, 0.0], [-60.0, -61.0], [None, None])
