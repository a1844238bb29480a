"""Tests for metrics recording."""
from lattice_assoc import observability
from lattice_assoc.config import settings


class _Recorder:
    def __init__(self):
        self.events = []

    def debug(self, event, **kw):
        self.events.append((event, kw))


def test_failed_metric_update_is_logged(monkeypatch):
    """Test a broken metric callback does not raise but leaves a debug line."""
    recorder = _Recorder()
    monkeypatch.setattr(observability, 'logger', recorder)
    monkeypatch.setattr(settings, 'metrics_enabled', True)

    observability.record(lambda m: m.statistics_total.labels(unknown='x').inc())

    assert len(recorder.events) == 1
    event, context = recorder.events[0]
    assert event == "Metric update failed"
    assert context['error_type'] == 'ValueError'


def test_metrics_disabled_skips_callback(monkeypatch):
    calls = []
    monkeypatch.setattr(settings, 'metrics_enabled', False)

    observability.record(lambda m: calls.append(m))
    assert calls == []
