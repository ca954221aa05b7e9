import json

import pytest

from csm.classifier import (
    CollaborationReport,
    Level,
    SameRole,
    classify_all,
    classify_pair,
)
from csm.dsl import parse_text
from csm.fixtures import load
from csm.validator import InvalidModel

VT = Level.VERY_TIGHT
T = Level.TIGHT
L = Level.LOOSE
VL = Level.VERY_LOOSE


class TestLevelFixtures:
    def test_very_tight(self, scenarios):
        report = classify_all(scenarios["hotel_agency"])
        assert [f.level for f in report.findings] == [VT]
        [f] = report.findings
        assert (f.producer, f.consumer, f.artifact, f.artifact_kind) == (
            "Hotel",
            "Agency",
            "MakeBooking",
            "process",
        )
        assert "owner(Hotel,MakeBooking)" in f.evidence
        assert "responsibility(Agency,MakeBooking)" in f.evidence

    def test_tight(self, scenarios):
        report = classify_all(scenarios["airline_alliance"])
        assert [f.level for f in report.findings] == [T]
        [f] = report.findings
        assert (f.producer, f.consumer, f.artifact) == ("AirlineA", "AirlineB", "BonusCalculation")

    def test_loose_both_directions(self, scenarios):
        report = classify_all(scenarios["gp_lab"])
        assert report.pair_summary == {
            ("GP", "Laboratory"): frozenset({L}),
            ("Laboratory", "GP"): frozenset({L}),
        }
        artifacts = {(f.producer, f.artifact) for f in report.findings}
        assert artifacts == {("GP", "TestRequest"), ("Laboratory", "SentTestResult")}

    def test_very_loose_both_directions(self, scenarios):
        report = classify_all(scenarios["gp_hospital"])
        assert report.pair_summary == {
            ("GP", "Hospital"): frozenset({VL}),
            ("Hospital", "GP"): frozenset({VL}),
        }

    def test_healthcare_mixes_levels_per_pair(self, scenarios):
        report = classify_all(scenarios["healthcare"])
        assert report.levels_between("GP", "Laboratory") == {L}
        assert report.levels_between("GP", "Hospital") == {VL}
        assert report.levels_between("Hospital", "Laboratory") == frozenset()


class TestDirectionality:
    def test_very_tight_owner_side_only(self, scenarios):
        m = scenarios["hotel_agency"]
        assert [f.level for f in classify_pair(m, "Hotel", "Agency")] == [VT]
        assert classify_pair(m, "Agency", "Hotel") == []

    def test_tight_is_symmetric_and_lexicographic(self, scenarios):
        m = scenarios["airline_alliance"]
        ab = classify_pair(m, "AirlineA", "AirlineB")
        ba = classify_pair(m, "AirlineB", "AirlineA")
        assert ab == ba
        assert ab[0].producer == "AirlineA"

    def test_same_role_rejected(self, scenarios):
        with pytest.raises(SameRole):
            classify_pair(scenarios["gp_lab"], "GP", "GP")


class TestPatternDetails:
    def test_waiting_flag_separates_loose_from_very_loose(self, scenarios):
        gp_lab = scenarios["gp_lab"]
        [f] = [x for x in classify_pair(gp_lab, "GP", "Laboratory") if x.artifact == "TestRequest"]
        assert f.level is L and "waiting point" in f.evidence

        gp_hospital = scenarios["gp_hospital"]
        [f] = classify_pair(gp_hospital, "GP", "Hospital")
        assert f.level is VL and "no waiting point" in f.evidence

    def test_write_privileges_disqualify_tight(self):
        # Same shape as a tight alliance, but one owner may modify foreign data.
        text = (
            'model "m" { role A role B class C '
            "process P { owner A owner B output C } "
            "grant A on C { creation, reference, reference+, modification+ } "
            "grant B on C { creation, reference, reference+ } }"
        )
        model = parse_text(text).model
        assert classify_all(model).findings == ()

    def test_consumer_write_rights_disqualify_loose(self, scenarios):
        # Both roles hold creation on Booking, so neither is a pure consumer.
        m = scenarios["hotel_agency"]
        assert all(f.artifact_kind == "process" for f in classify_all(m).findings)

    def test_co_privileged_output_disqualifies_class_sharing(self):
        # B reads what A creates; with both roles privileged on the process
        # that produces C the class pattern must stay silent, without it the
        # same grants yield a very loose finding.
        def build(joint: bool):
            roles = "owner A responsible B" if joint else "owner A"
            text = (
                'model "m" { role A role B class C '
                f"process P {{ {roles} output C }} "
                "grant A on C { creation, reference, reference+ } "
                "grant B on C { reference+ } }"
            )
            return parse_text(text).model

        assert classify_pair(build(joint=True), "A", "B") == []
        [f] = classify_pair(build(joint=False), "A", "B")
        assert f.level is VL and f.artifact == "C"

    def test_invalid_model_rejected(self):
        with pytest.raises(InvalidModel):
            classify_all(load("bad_c3"))


class TestReport:
    def test_levels_between_is_unordered(self, scenarios):
        report = classify_all(scenarios["gp_lab"])
        assert report.levels_between("GP", "Laboratory") == report.levels_between(
            "Laboratory", "GP"
        )

    def test_to_table_layout(self, scenarios):
        table = classify_all(scenarios["hotel_agency"]).to_table()
        header, row = table.splitlines()
        assert header.split() == ["LEVEL", "PRODUCER", "CONSUMER", "ARTIFACT"]
        assert row.split() == ["very", "tight", "Hotel", "Agency", "MakeBooking"]

    def test_to_dict_is_json_ready(self, scenarios):
        doc = classify_all(scenarios["healthcare"]).to_dict()
        json.dumps(doc)
        assert doc["pair_summary"]["GP->Laboratory"] == ["loose"]

    def test_empty_report_table(self):
        assert CollaborationReport(()).to_table().splitlines()[0].startswith("LEVEL")
