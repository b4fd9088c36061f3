import json
from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")

T0 = datetime(2021, 3, 1, tzinfo=timezone.utc)


def record(tweet_id, user_id, text="kaixo", lang="eu", minutes=0, rt=None):
    return {
        "tweet_id": tweet_id, "user_id": user_id, "text": text, "lang": lang,
        "created_at": (T0 + timedelta(minutes=minutes)).strftime("%Y-%m-%dT%H:%M:%SZ"),
        "retweet_of_user_id": rt,
    }


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r) + "\n")
    return path


@pytest.fixture
def jsonl(tmp_path):
    def make(records, name="tweets.jsonl"):
        return write_jsonl(tmp_path / name, records)
    return make


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
