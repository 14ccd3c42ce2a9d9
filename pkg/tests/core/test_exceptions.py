import pytest

from leodoppler.core.exceptions import (
    CertificationError,
    ConfigurationError,
    DatasetError,
    DimensionError,
    GeometryError,
    LeoDopplerError,
    PairingError,
    RecoveryError,
    ScalingError,
    SolverError,
    UnderdeterminedError,
    ValidationError,
)


class TestLeoDopplerError:
    """Test LeoDopplerError base exception class."""

    def test_error_creation_basic(self):
        """Test creating a LeoDopplerError with just a message."""
        msg = "Test error message"
        exc = LeoDopplerError(msg)

        assert str(exc) == msg
        assert exc.details == {}

    def test_error_with_details(self):
        details = {"key1": "value1", "key2": 42}
        exc = LeoDopplerError("Test error message", details=details)

        assert exc.details == details

    def test_error_inheritance(self):
        assert isinstance(LeoDopplerError("test"), Exception)

    def test_none_details_defaults_to_empty(self):
        exc = LeoDopplerError("message", details=None)

        assert exc.details == {}


class TestConfigurationError:
    """Test ConfigurationError exception class."""

    def test_configuration_error_with_message_only(self):
        """ConfigurationError with only a message (treated as config_key)."""
        exc = ConfigurationError(config_key="Missing config key")

        assert "configuration" in str(exc).lower()
        assert "Missing config key" in str(exc)

    def test_configuration_error_with_key_and_message(self):
        exc = ConfigurationError(config_key="gwa.threshold", message="must be positive")

        assert "gwa.threshold" in str(exc)
        assert "must be positive" in str(exc)
        assert exc.config_key == "gwa.threshold"

    def test_configuration_error_none_key_defaults(self):
        exc = ConfigurationError(config_key=None, message="Something is wrong")

        assert exc.config_key == "configuration"
        assert "Something is wrong" in str(exc)

    def test_configuration_error_no_args(self):
        exc = ConfigurationError()

        assert "Invalid configuration" in str(exc)
        assert exc.details == {}

    def test_configuration_error_inheritance(self):
        assert isinstance(ConfigurationError(config_key="test"), LeoDopplerError)


class TestDomainErrors:
    """Context carried by the domain-specific exceptions."""

    def test_geometry_error_records_sat_id(self):
        exc = GeometryError("coincident", sat_id="SAT-07")

        assert exc.sat_id == "SAT-07"
        assert exc.details == {"sat_id": "SAT-07"}

    def test_pairing_error_default_message(self):
        exc = PairingError(3)

        assert exc.index == 3
        assert exc.details["index"] == 3
        assert "index 3" in str(exc)

    def test_underdetermined_error_counts(self):
        exc = UnderdeterminedError(2)

        assert exc.count == 2
        assert exc.required == 4
        assert "2 measurements" in str(exc)

    def test_solver_error_records_status_and_iteration(self):
        exc = SolverError("failed", status="infeasible", iteration=4)

        assert exc.status == "infeasible"
        assert exc.iteration == 4
        assert exc.details == {"status": "infeasible", "iteration": 4}

    def test_solver_error_without_context(self):
        exc = SolverError("failed")

        assert exc.status is None
        assert exc.iteration is None
        assert exc.details == {}

    def test_dataset_error_location_prefix(self):
        exc = DatasetError("bad number", path="doppler.csv", line=12)

        assert str(exc) == "doppler.csv:12: bad number"
        assert exc.path == "doppler.csv"
        assert exc.line == 12
        assert exc.details == {"path": "doppler.csv", "line": 12}

    def test_dataset_error_line_only(self):
        exc = DatasetError("bad number", line=5)

        assert str(exc) == "line 5: bad number"
        assert exc.path is None

    def test_dataset_error_without_location(self):
        assert str(DatasetError("empty")) == "empty"

    @pytest.mark.parametrize(
        "cls",
        [
            ValidationError,
            ScalingError,
            DimensionError,
            RecoveryError,
            CertificationError,
        ],
    )
    def test_plain_errors_inherit_base(self, cls):
        exc = cls("boom", details={"k": 1})

        assert isinstance(exc, LeoDopplerError)
        assert exc.details == {"k": 1}


class TestExceptionBehavior:
    """Test exception behavior and raise/catch patterns."""

    def test_catch_base_catches_all(self):
        with pytest.raises(LeoDopplerError):
            raise SolverError("test", iteration=1)

    def test_catch_configuration_error_does_not_catch_all(self):
        with pytest.raises(LeoDopplerError):
            with pytest.raises(ConfigurationError):
                raise LeoDopplerError("test")

    def test_raise_and_catch_with_context(self):
        try:
            try:
                raise ValueError("Original error")
            except ValueError as e:
                raise LeoDopplerError("Wrapped error") from e
        except LeoDopplerError as e:
            assert "Wrapped error" == str(e)
            assert isinstance(e.__cause__, ValueError)
