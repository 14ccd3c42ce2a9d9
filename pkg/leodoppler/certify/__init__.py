"""Optimality certificates and a priori noise bounds."""

from leodoppler.certify.certificate import (
    Certificate,
    CertificateThresholds,
    Verdict,
    certify,
    eigenvalue_ratio,
    rank1_moment,
    recover_lifted,
    recover_solution,
)

__all__ = [
    "Certificate",
    "CertificateThresholds",
    "Verdict",
    "certify",
    "eigenvalue_ratio",
    "rank1_moment",
    "recover_lifted",
    "recover_solution",
]
