# training/forms.py
import math

from django import forms
from django.core.exceptions import ValidationError


class PrivacyLevelField(forms.FloatField):
    """A positive float where 'inf' is allowed and means no noise"""

    def validate(self, value):
        forms.Field.validate(self, value)
        if value in self.empty_values:
            return
        if math.isnan(value) or value <= 0:
            raise ValidationError("epsilon0 must be positive (or inf).", code='invalid')


class SgdForm(forms.Form):
    """Arguments of the sgd command"""
    LOSS_CHOICES = [('logistic', 'logistic'), ('softmax', 'softmax'), ('squared', 'squared')]

    eta = forms.FloatField(min_value=0.0)
    epochs = forms.IntegerField(min_value=1)
    blocks = forms.IntegerField(min_value=2)
    clip = forms.FloatField(min_value=0.0)
    epsilon0 = PrivacyLevelField()
    lam = forms.FloatField(min_value=2.0)
    samples = forms.IntegerField(min_value=2)
    features = forms.IntegerField(min_value=1)
    classes = forms.IntegerField(min_value=2)
    loss = forms.ChoiceField(choices=LOSS_CHOICES)
    seed = forms.IntegerField(min_value=0)
    permutation_seed = forms.IntegerField(min_value=0, required=False)

    def clean_eta(self):
        eta = self.cleaned_data.get('eta')
        if eta is not None and eta <= 0:
            raise ValidationError("eta must be positive.")
        return eta

    def clean_clip(self):
        clip = self.cleaned_data.get('clip')
        if clip is not None and clip <= 0:
            raise ValidationError("clip must be positive.")
        return clip

    def clean(self):
        cleaned_data = super().clean()
        if cleaned_data.get('loss') == 'logistic' and cleaned_data.get('classes', 2) != 2:
            self.add_error('classes', "the logistic loss is binary; use --loss softmax for more classes.")
        samples, blocks = cleaned_data.get('samples'), cleaned_data.get('blocks')
        if samples is not None and blocks is not None and samples < blocks:
            self.add_error('samples', f"{samples} samples cannot fill {blocks} blocks.")
        return cleaned_data


class PlanForm(forms.Form):
    """Arguments of the plan command; exactly one target form is given"""
    rdp_slope = forms.FloatField(required=False)
    target_rdp = forms.FloatField(required=False)
    target_mu = forms.FloatField(required=False)
    lam = forms.FloatField(min_value=2.0, required=False)
    epochs = forms.IntegerField(min_value=1)
    blocks = forms.IntegerField(min_value=2)

    def clean(self):
        cleaned_data = super().clean()
        given = [name for name in ('rdp_slope', 'target_rdp', 'target_mu') if cleaned_data.get(name) is not None]
        if len(given) != 1:
            raise ValidationError("Give exactly one of --rdp-slope, --target-rdp or --target-mu.")
        if cleaned_data[given[0]] <= 0:
            self.add_error(given[0], "the target must be positive.")
        if given[0] == 'target_rdp' and cleaned_data.get('lam') is None:
            self.add_error('lam', "--target-rdp needs --lambda.")
        return cleaned_data
