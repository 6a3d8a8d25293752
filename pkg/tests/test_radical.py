import pytest

from hesse_mahler.radical import RadicalSyntaxError, evaluate_radical, parse_radical


def test_simple_values(prec):
    mp = prec.mp
    assert evaluate_radical("729+405*sqrt(3)", prec) == 729 + 405 * mp.sqrt(3)
    assert abs(evaluate_radical("cbrt(-27)", prec) - 3 * mp.expjpi(mp.mpf(1) / 3)) < 1e-70
    assert abs(evaluate_radical("2^(1/2) - 2**(1/2)", prec)) < 1e-70
    assert evaluate_radical("i*i", prec) == -1


def test_cubic_conjugates_are_roots(prec):
    # 6 - 6 cbrt2 + 18 cbrt4 and its complex conjugates solve T^3 - 18T^2 + 756T - 27000
    for text in ("6-6*cbrt(2)+18*cbrt(4)",
                 "6+3*cbrt(2)-9*cbrt(4) + 3*i*sqrt(3)*(cbrt(2)+3*cbrt(4))"):
        T = evaluate_radical(text, prec)
        assert abs(T ** 3 - 18 * T ** 2 + 756 * T - 27000) < 1e-60


@pytest.mark.parametrize("text", ["__import__('os')", "x+1", "sqrt(2,3)", "1 +", "log(2)", "2**x"])
def test_rejects_foreign_syntax(text):
    with pytest.raises(RadicalSyntaxError):
        parse_radical(text)
