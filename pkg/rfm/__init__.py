"""
Reduced-Form Model Module
Emulates the photochemical model under emission perturbations
"""

from .reduced_form import (
    SensitivityField,
    evaluate_rfm,
    evaluate_rfm_field,
    evaluate_rfm_at,
    compose_perturbation,
    negative_fraction,
)

__all__ = [
    'SensitivityField',
    'evaluate_rfm',
    'evaluate_rfm_field',
    'evaluate_rfm_at',
    'compose_perturbation',
    'negative_fraction',
]
