import pytest

from forgepipe import errors


def test_error_codes_are_snake_case():
    assert errors.BadMagicError("x").code == "bad_magic"
    assert errors.SingleClassError("x").code == "single_class"
    assert errors.NonMonotoneFramesError("x").code == "non_monotone_frames"
    assert errors.TrackTooShortError("x").code == "track_too_short"
    assert errors.NoFacesDetectedError("x").code == "no_faces_detected"


def test_all_errors_inherit_base():
    for name in dir(errors):
        obj = getattr(errors, name)
        if isinstance(obj, type) and name.endswith("Error") and name != "ForgepipeError":
            assert issubclass(obj, errors.ForgepipeError), name


def test_parse_error_carries_line_number():
    err = errors.ParseError("bad json", line_no=17)
    assert err.line_no == 17
    assert "17" in str(err)


def test_errors_are_catchable_as_base():
    with pytest.raises(errors.ForgepipeError):
        raise errors.TruncatedPayloadError("short file")
