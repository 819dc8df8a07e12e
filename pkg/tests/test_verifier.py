import json

import pytest

from evildet import verifier
from evildet.numtheory import sieve
from evildet.verifier import (
    CHECK_NAMES,
    Depth,
    VerificationAborted,
    VerificationError,
    VerificationRecord,
    VerifyConfig,
    emit_sequence,
    verify_prime,
    verify_range,
)


def canonical(records):
    return json.dumps([r.to_dict() for r in records], sort_keys=True).encode()


class TestVerifyPrime:
    def test_p5_full(self):
        rec = verify_prime(5, "full")
        assert rec.status == "PASS"
        assert rec.det_bareiss == rec.det_modular == -2
        assert (rec.a, rec.h, rec.b) == (2, 1, 1)
        assert (rec.epsilon.alpha, rec.epsilon.beta) == (1, 1)
        assert rec.residue_class_mod8 == 5
        # every 1 mod 4 check ran; the 3 mod 4 one did not
        assert rec.checks["p3mod4_unit_det"] == "skipped"
        assert all(rec.checks[c] == "pass" for c in CHECK_NAMES if c != "p3mod4_unit_det")

    def test_p13_determinant_only(self):
        rec = verify_prime(13)
        assert rec.status == "PASS" and rec.det == -18 and rec.a == 18
        assert rec.checks["decomposition"] == "skipped"
        assert rec.checks["theorem1"] == rec.checks["corollary2_sign"] == "pass"

    def test_p7_determinant_only(self):
        rec = verify_prime(7)
        assert rec.status == "PASS" and rec.det == 1
        assert rec.h is None and rec.a is None and rec.epsilon is None
        assert rec.checks["p3mod4_unit_det"] == "pass"
        assert rec.residue_class_mod8 == 7

    def test_p7_full_runs_variant(self):
        rec = verify_prime(7, Depth.FULL)
        assert rec.checks["decomposition"] == "pass"
        assert rec.checks["theorem1"] == "skipped"

    def test_caps_skip_cyclotomic_checks(self):
        rec = verify_prime(13, "full", VerifyConfig(cyclo_cap=5, gauss_cap=5))
        assert rec.status == "PASS"
        assert rec.checks["decomposition"] == rec.checks["gauss_lemma"] == "skipped"
        assert rec.checks["theorem1"] == "pass"

    def test_bareiss_cap_for_3mod4(self):
        rec = verify_prime(11, config=VerifyConfig(bareiss_3mod4_cap=7))
        assert rec.det_bareiss is None and rec.det_modular == 1 and rec.status == "PASS"
        assert verify_prime(11, config=VerifyConfig(bareiss_3mod4_cap=None)).det_bareiss == 1

    def test_rejects_non_prime(self):
        with pytest.raises(ValueError):
            verify_prime(15)

    def test_phase_name_attached(self, monkeypatch):
        def boom(*args):
            raise ZeroDivisionError("synthetic")

        monkeypatch.setattr(verifier.quadfield, "class_number", boom)
        with pytest.raises(VerificationError) as info:
            verify_prime(13)
        assert info.value.phase == "class_number" and info.value.p == 13
        assert "synthetic" in str(info.value)

    def test_wrong_a_fails_theorem(self, monkeypatch):
        monkeypatch.setattr(verifier.quadfield, "compute_a", lambda p, eps, h: (20, 5))
        rec = verify_prime(13)
        assert rec.checks["theorem1"] == "fail" and rec.status == "FAIL"
        assert "theorem1" in rec.failure_summary()

    def test_disagreeing_algorithms_flagged(self, monkeypatch):
        monkeypatch.setattr(verifier, "det_bareiss", lambda C: 7)
        rec = verify_prime(7)
        assert rec.status == "FAIL" and rec.checks["p3mod4_unit_det"] == "fail"
        assert "differs" in rec.error


class TestRecord:
    def test_round_trip(self):
        for p, depth in [(5, "full"), (7, "determinant-only"), (13, "determinant-only")]:
            rec = verify_prime(p, depth)
            d = rec.to_dict(timings=True)
            back = VerificationRecord.from_dict(json.loads(json.dumps(d)))
            assert back.to_dict(timings=True) == d
            assert back.epsilon == rec.epsilon

    def test_schema_and_timings(self):
        rec = verify_prime(5)
        d = rec.to_dict()
        assert d["schema"] == 1 and "elapsed" not in d
        assert list(d["checks"]) == list(CHECK_NAMES)
        assert "det_modular" in rec.to_dict(timings=True)["elapsed"]
        with pytest.raises(ValueError):
            VerificationRecord.from_dict(dict(d, schema=2))


class TestVerifyRange:
    def test_bound30_1mod4(self):
        recs = verify_range(30, class_filter="1mod4", workers=1)
        assert [r.p for r in recs] == [5, 13, 17, 29]
        assert all(r.status == "PASS" for r in recs)

    def test_bound4_empty(self):
        assert verify_range(4, workers=1) == []
        assert [r.p for r in verify_range(4, class_filter="both", workers=1)] == [3]

    def test_bound_below_3(self):
        with pytest.raises(ValueError):
            verify_range(2)

    def test_bound100_both(self):
        recs = verify_range(100, class_filter="both", workers=1)
        assert len(recs) == 24
        assert [r.p for r in recs] == [q for q in sieve(100) if q != 2]
        assert all(r.status == "PASS" for r in recs)

    def test_worker_count_does_not_change_bytes(self):
        one = verify_range(120, class_filter="both", workers=1)
        two = verify_range(120, class_filter="both", workers=2)
        assert canonical(one) == canonical(two)

    def test_full_contains_determinant_only(self):
        cfg = VerifyConfig(cyclo_cap=13, gauss_cap=17)
        quick = verify_range(20, "determinant-only", "both", config=cfg, workers=1)
        full = verify_range(20, "full", "both", config=cfg, workers=1)
        keys = ["p", "det_bareiss", "det_modular", "h", "a", "b", "epsilon"]
        for q, f in zip(quick, full):
            dq, df = q.to_dict(), f.to_dict()
            assert {k: dq[k] for k in keys} == {k: df[k] for k in keys}
            for name, value in dq["checks"].items():
                if value != "skipped":
                    assert df["checks"][name] == value

    def test_abort_on_first_failure(self, monkeypatch):
        real = verifier.quadfield.compute_a

        def wrong_for_17(p, eps, h):
            a, b = real(p, eps, h)
            return (a + 2, b) if p == 17 else (a, b)

        monkeypatch.setattr(verifier.quadfield, "compute_a", wrong_for_17)
        with pytest.raises(VerificationAborted) as info:
            verify_range(30, class_filter="1mod4", workers=1)
        assert info.value.record.p == 17
        assert [r.p for r in info.value.completed] == [5, 13, 17]

        recs = verify_range(30, class_filter="1mod4", workers=1, continue_on_failure=True)
        assert [r.status for r in recs] == ["PASS", "PASS", "FAIL", "PASS"]

    def test_errors_become_records_when_continuing(self, monkeypatch):
        def boom(p):
            if p == 13:
                raise ArithmeticError("synthetic")
            return real(p)

        real = verifier.quadfield.fundamental_unit
        monkeypatch.setattr(verifier.quadfield, "fundamental_unit", boom)
        recs = verify_range(20, class_filter="1mod4", workers=1, continue_on_failure=True)
        bad = next(r for r in recs if r.p == 13)
        assert bad.status == "FAIL" and "fundamental_unit" in bad.error
        with pytest.raises(VerificationError):
            verify_range(20, class_filter="1mod4", workers=1)

    def test_explicit_prime_list(self):
        recs = verify_range(0, primes=[13, 5], workers=1)
        assert [r.p for r in recs] == [5, 13]


class TestSequence:
    def test_bound17(self):
        assert emit_sequence(17) == [(5, -2), (13, -18), (17, -4)]

    def test_published_prefix(self):
        expected = [-2, -18, -4, -70, -882, -32, -182, -29718, -1068, -500, -5604]
        out = emit_sequence(100)
        assert [d for _, d in out] == expected

    def test_negative_and_even(self):
        assert all(d < 0 and d % 2 == 0 for _, d in emit_sequence(400))

    def test_small_bound(self):
        assert emit_sequence(4) == []
