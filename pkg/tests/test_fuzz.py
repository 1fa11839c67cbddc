import json

from indescent.fuzz import fuzz_instance, run_campaign


def test_single_instance_record():
    r = fuzz_instance(3)
    assert r.agree
    d = r.to_dict()
    json.dumps(d)
    assert d["agree"] and d["seed"] == 3
    assert r.line().startswith("ok ")


def test_campaign_agrees_and_covers_both_verdicts():
    records = run_campaign(range(40))
    assert all(r.agree for r in records), [r.line() for r in records if not r.agree]
    verdicts = {r.engine for r in records}
    assert verdicts == {"included", "not-included"}
    for r in records:
        if r.engine == "not-included":
            assert r.engine_witness is not None and r.witnesses_ok
