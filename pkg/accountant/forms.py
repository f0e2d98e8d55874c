# accountant/forms.py
import math

from django import forms
from django.core.exceptions import ValidationError

from .pairdist import MAX_TAIL_TOL
from .services.accounting_service import METHODS, preset_grid


class FloatListField(forms.Field):
    """A list of finite floats, as collected by an argparse nargs='+' option"""

    def __init__(self, *, min_value=None, max_value=None, **kwargs):
        self.min_value = min_value
        self.max_value = max_value
        super().__init__(**kwargs)

    def to_python(self, value):
        if value in self.empty_values:
            return []
        if not isinstance(value, (list, tuple)):
            value = [value]
        try:
            return [float(item) for item in value]
        except (TypeError, ValueError):
            raise ValidationError("Enter a list of numbers.", code='invalid')

    def validate(self, value):
        super().validate(value)
        for item in value:
            if not math.isfinite(item):
                raise ValidationError(f"{item} is not a finite number.", code='invalid')
            if self.min_value is not None and item < self.min_value:
                raise ValidationError(f"Ensure every value is at least {self.min_value}.", code='min_value')
            if self.max_value is not None and item > self.max_value:
                raise ValidationError(f"Ensure every value is at most {self.max_value}.", code='max_value')


class IntegerListField(FloatListField):

    def to_python(self, value):
        values = super().to_python(value)
        if any(not item.is_integer() for item in values if math.isfinite(item)):
            raise ValidationError("Enter a list of whole numbers.", code='invalid')
        return [int(item) if math.isfinite(item) else item for item in values]


class TailTolMixin:
    """tail_tol must lie in (0, 1e-6]; blank means the configured default"""

    def clean_tail_tol(self):
        tail_tol = self.cleaned_data.get('tail_tol')
        if tail_tol is not None and not 0.0 < tail_tol <= MAX_TAIL_TOL:
            raise ValidationError(f"tail-tol must lie in (0, {MAX_TAIL_TOL}].")
        return tail_tol


class RdpForm(TailTolMixin, forms.Form):
    """Arguments of the rdp command"""
    epsilon0 = forms.FloatField(min_value=0.0)
    n = forms.IntegerField(min_value=1)
    lam = forms.FloatField()
    tail_tol = forms.FloatField(required=False)
    format = forms.ChoiceField(choices=[('json', 'json'), ('csv', 'csv')])

    def clean_lam(self):
        lam = self.cleaned_data.get('lam')
        if lam is not None and lam <= 1:
            raise ValidationError("lambda must be greater than 1.")
        return lam


class CompareForm(TailTolMixin, forms.Form):
    """Arguments of the compare command; a preset fills whatever is left blank"""
    preset = forms.ChoiceField(choices=[('', '---'), ('fig2', 'fig2'), ('fig3', 'fig3')], required=False)
    epsilon0 = FloatListField(min_value=0.0, required=False)
    n = IntegerListField(min_value=1, required=False)
    lam = FloatListField(required=False)
    methods = forms.MultipleChoiceField(choices=[(m, m) for m in METHODS])
    tail_tol = forms.FloatField(required=False)
    workers = forms.IntegerField(min_value=1, required=False)

    def clean_lam(self):
        lambdas = self.cleaned_data.get('lam') or []
        if any(lam <= 1 for lam in lambdas):
            raise ValidationError("every lambda must be greater than 1.")
        return lambdas

    def clean(self):
        cleaned_data = super().clean()
        preset = cleaned_data.get('preset')
        if preset:
            grid = preset_grid(preset)
            cleaned_data['epsilon0'] = cleaned_data.get('epsilon0') or grid['epsilon0s']
            cleaned_data['n'] = cleaned_data.get('n') or grid['ns']
            cleaned_data['lam'] = cleaned_data.get('lam') or grid['lambdas']
        for field in ('epsilon0', 'n', 'lam'):
            if field in cleaned_data and not cleaned_data[field]:
                self.add_error(field, "Give at least one value or choose a preset.")
        return cleaned_data


class TradeoffForm(TailTolMixin, forms.Form):
    """Arguments of the tradeoff command"""
    KIND_CHOICES = [
        ('exact', 'exact'),
        ('closed-form', 'closed-form'),
        ('gaussian', 'gaussian'),
        ('symmetrized', 'symmetrized'),
    ]
    epsilon0 = forms.FloatField(min_value=0.0)
    n = forms.IntegerField(min_value=1)
    kind = forms.ChoiceField(choices=KIND_CHOICES)
    grid_points = forms.IntegerField(min_value=2)
    mu = forms.FloatField(min_value=0.0, required=False)
    tail_tol = forms.FloatField(required=False)

    def clean(self):
        cleaned_data = super().clean()
        kind = cleaned_data.get('kind')
        n = cleaned_data.get('n')
        if kind == 'gaussian' and cleaned_data.get('mu') is None and n is not None and n < 2:
            self.add_error('n', "the Gaussian curve needs --mu or n >= 2.")
        return cleaned_data


class SimulateForm(forms.Form):
    """Arguments of the simulate command"""
    epsilon0 = forms.FloatField(min_value=0.0)
    n = forms.IntegerField(min_value=1)
    alpha = FloatListField(required=False)
    samples = forms.IntegerField(min_value=1)
    seed = forms.IntegerField(min_value=0)
    lam = forms.FloatField(required=False)
    clt_n = IntegerListField(min_value=2, required=False)

    def clean_alpha(self):
        alphas = self.cleaned_data.get('alpha') or []
        if any(not 0.0 < alpha < 1.0 for alpha in alphas):
            raise ValidationError("every alpha must lie strictly inside (0, 1).")
        return alphas

    def clean_lam(self):
        lam = self.cleaned_data.get('lam')
        if lam is not None and lam <= 1:
            raise ValidationError("lambda must be greater than 1.")
        return lam

    def clean(self):
        cleaned_data = super().clean()
        if not (cleaned_data.get('alpha') or cleaned_data.get('lam') is not None or cleaned_data.get('clt_n')):
            raise ValidationError("Ask for at least one of --alpha, --lambda or --clt-n.")
        return cleaned_data
