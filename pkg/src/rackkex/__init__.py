"""Rack and quandle algebra with a rack-based key agreement protocol."""

from .freerack import FRElement, fq_canonical, fq_embed, fr_ldiv, fr_op
from .kex import Certificate, PublicParams, SecretKey
from .permgroups import Perm, PermGroup
from .rackcore import (ConjRack, Rack, TableRack, check_rack_axioms, cyclic, dihedral,
                       rack_from_descriptor, trivial)
from .thompson import TElement, t_from_word
from .words import Word, parse_word

__all__ = [
    "Certificate", "ConjRack", "FRElement", "Perm", "PermGroup", "PublicParams", "Rack", "SecretKey",
    "TElement", "TableRack", "Word", "check_rack_axioms", "cyclic", "dihedral", "fq_canonical",
    "fq_embed", "fr_ldiv", "fr_op", "parse_word", "rack_from_descriptor", "t_from_word", "trivial",
]

__version__ = "0.1.0"
