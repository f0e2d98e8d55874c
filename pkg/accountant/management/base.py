# accountant/management/base.py
import json
import logging
import math

from django.core.management.base import BaseCommand, CommandError

from accountant.exceptions import DomainError

logger = logging.getLogger(__name__)

EXIT_IO = 1
EXIT_ARGUMENTS = 2
EXIT_INFEASIBLE = 3


def json_safe(value):
    """Non-finite floats become 'inf' / '-inf' (as in the CSV output) or None for NaN"""
    if isinstance(value, dict):
        return {key: json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(item) for item in value]
    if isinstance(value, float) and not math.isfinite(value):
        if math.isnan(value):
            return None
        return 'inf' if value > 0 else '-inf'
    return value


class AccountingCommand(BaseCommand):
    """Shared plumbing: form validation, error-to-exit-code mapping, JSON output"""

    form_class = None

    def validate(self, data: dict) -> dict:
        form = self.form_class(data=data)
        if not form.is_valid():
            errors = '; '.join(
                f"{field}: {' '.join(messages)}" for field, messages in form.errors.items()
            )
            raise CommandError(errors, returncode=EXIT_ARGUMENTS)
        return form.cleaned_data

    def emit_json(self, payload) -> None:
        self.stdout.write(json.dumps(json_safe(payload), sort_keys=True, allow_nan=False))

    def handle(self, *args, **options):
        try:
            self.run(**options)
        except DomainError as e:
            raise CommandError(str(e), returncode=EXIT_ARGUMENTS)
        except OSError as e:
            logger.error(f"{self.__module__}: {e}")
            raise CommandError(f"I/O error: {e}", returncode=EXIT_IO)

    def run(self, **options):
        raise NotImplementedError
