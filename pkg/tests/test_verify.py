from bvmbounds import verify


def test_linalg_suite_passes_small():
    res = verify.check_linalg_chain(seed=1, count=50)
    assert all(r.passed for r in res) and len(res) == 8


def test_derivative_suite_passes():
    assert all(r.passed for r in verify.check_derivatives(seed=2))


def test_report_is_sorted_json():
    res = verify.check_linalg_chain(seed=1, count=5, dims=(2,))
    text = verify.report(res, 1)
    assert text == verify.report(res, 1)
    assert '"passed": true' in text
