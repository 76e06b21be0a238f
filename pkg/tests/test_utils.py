import os

import pytest

from chewing_ssl.core.errors import ArtifactMissingError
from chewing_ssl.utils.env import get_env, load_env_file
from chewing_ssl.utils.file_utils import require_artifact, require_artifacts, sanitize_filename
from chewing_ssl.utils.formatter import format_duration, write_text


class TestFileUtils:
    @pytest.mark.parametrize(
        "name,expected",
        [("S01", "S01"), ("a/b:c", "a_b_c"), ("", "unnamed_file"), ("  ..", "unnamed_file")],
    )
    def test_sanitize(self, name, expected):
        assert sanitize_filename(name) == expected

    def test_long_name_truncated(self):
        assert len(sanitize_filename("x" * 300 + ".csv")) == 200

    def test_require_artifact(self, temp_directory):
        present = os.path.join(temp_directory, "f.weights")
        write_text("x", present)
        assert require_artifact(present, "pretrain") == present
        with pytest.raises(ArtifactMissingError) as exc_info:
            require_artifacts([present, os.path.join(temp_directory, "g.weights")], "pretrain")
        assert exc_info.value.details["run_first"] == "pretrain"
        assert "chewing-ssl pretrain" in exc_info.value.message


class TestEnv:
    def test_env_file_does_not_override(self, temp_directory, monkeypatch):
        monkeypatch.setenv("CHEWING_SSL_TEST_KEEP", "original")
        monkeypatch.delenv("CHEWING_SSL_TEST_NEW", raising=False)
        path = os.path.join(temp_directory, ".env")
        write_text("# comment\nCHEWING_SSL_TEST_KEEP=changed\nCHEWING_SSL_TEST_NEW=value\n", path)

        loaded = load_env_file(path)
        assert loaded == {"CHEWING_SSL_TEST_NEW": "value"}
        assert get_env("CHEWING_SSL_TEST_KEEP") == "original"
        monkeypatch.delenv("CHEWING_SSL_TEST_NEW")

    def test_missing_env_file(self, temp_directory):
        assert load_env_file(os.path.join(temp_directory, ".env")) == {}

    def test_empty_value_uses_default(self, monkeypatch):
        monkeypatch.setenv("CHEWING_SSL_TEST_EMPTY", "")
        assert get_env("CHEWING_SSL_TEST_EMPTY", "fallback") == "fallback"


class TestFormatter:
    @pytest.mark.parametrize("seconds,expected", [(0, "0s"), (59, "59s"), (600, "10m"), (3725, "1h 2m 5s"), (-3, "0s")])
    def test_format_duration(self, seconds, expected):
        assert format_duration(seconds) == expected
