"""Sutured contact solid torus built from a pseudo-Anosov prong model.

Numeric construction of the Hamiltonian model, its time-1 map and contact
form, the gluing data, the Reeb orbit catalog and the homology rank tables.
"""
from .config import make_model
from .contact import ContactFormModel, build_cutoffs, eval_alpha, reeb_field, verify_contact_condition
from .flow import find_fixed_points, flow, flow_many, verify_exact_symplectomorphism
from .gluing import construct_gluing_data, suture_count, verify_gluing
from .homology import ch_rank_table, cyl_rank_table, ech_rank_table, rank_table
from .model import Tolerances, TorusModel
from .orbits import build_orbits, cz_index, iterate
from .reports import VerificationReport

__all__ = [
    "ContactFormModel",
    "Tolerances",
    "TorusModel",
    "VerificationReport",
    "build_cutoffs",
    "build_orbits",
    "ch_rank_table",
    "construct_gluing_data",
    "cyl_rank_table",
    "cz_index",
    "ech_rank_table",
    "eval_alpha",
    "find_fixed_points",
    "flow",
    "flow_many",
    "iterate",
    "make_model",
    "rank_table",
    "reeb_field",
    "suture_count",
    "verify_contact_condition",
    "verify_exact_symplectomorphism",
    "verify_gluing",
]
