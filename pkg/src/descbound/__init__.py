"""descbound: description-length accounting and meta-overfitting bounds.

The package answers two questions about a machine-learning model that was
evaluated on a shared test set:

* given the model's description length in bits, how far can its test error
  understate its true error?  (:mod:`descbound.bounds`)
* given a structured description of the model, how many bits does it cost?
  (:mod:`descbound.encoding` and friends)

Monte Carlo checks of the underlying tail bounds live in
:mod:`descbound.verify`; the ``descbound`` command line exposes all of it.
"""

from .bounds import (
    BoundInputs,
    BoundResult,
    DomainError,
    chernoff_lower_tail,
    folklore_bound,
    iterate_bound,
    kl_bernoulli,
    solve_bound,
    t_map,
)
from .codebook import Codebook, UnknownSymbolError, default_codebook
from .dsl import DescriptionDoc, DslError, parse, parse_file, roundtrip
from .encoding import (
    CountConfig,
    EnglishMode,
    count_description,
    count_english,
    count_equation,
)
from .ledger import BitLedger, LedgerItem
from .verify import McConfig, McReport, kl_scan, mc_chernoff, mc_theorem_coverage

__version__ = "0.1.0"

__all__ = [
    "BoundInputs",
    "BoundResult",
    "DomainError",
    "chernoff_lower_tail",
    "folklore_bound",
    "iterate_bound",
    "kl_bernoulli",
    "solve_bound",
    "t_map",
    "Codebook",
    "UnknownSymbolError",
    "default_codebook",
    "DescriptionDoc",
    "DslError",
    "parse",
    "parse_file",
    "roundtrip",
    "CountConfig",
    "EnglishMode",
    "count_description",
    "count_english",
    "count_equation",
    "BitLedger",
    "LedgerItem",
    "McConfig",
    "McReport",
    "kl_scan",
    "mc_chernoff",
    "mc_theorem_coverage",
    "__version__",
]
