"""Word-map probability distributions and structure checks on finite groups."""

from .catalog import GroupSpec, build, catalog, spec_order
from .dist import (
    ClassDistribution,
    Estimate,
    centralizer_index_tail,
    commuting_probability,
    distribution,
    exact_distribution_bruteforce,
    exact_distribution_dp,
    max_point,
    monte_carlo,
    prob_at,
)
from .errors import (
    BudgetExceededError,
    ChainFormError,
    GroupConstructionError,
    GroupSpecError,
    NormalityError,
    WordProbError,
    WordSyntaxError,
)
from .groups import ConjugacyClasses, FiniteGroup, load_group_file
from .subgroups import (
    Quotient,
    SubgroupSet,
    all_subgroups,
    centralizer,
    centralizer_of_set,
    commutator_subgroup,
    coset_action_kernel,
    is_normal,
    lower_central_series,
    nilpotency_class,
    quotient,
    subgroup_from_elements,
    subgroup_from_generators,
    subgroups_of_index_at_most,
    trivial_subgroup,
    whole_group,
)
from .theorems import (
    Inequality,
    SnResidual,
    TheoremReport,
    certify_identity,
    lcm_up_to,
    n_schedule,
    recheck_report_line,
    sn_residual,
    verify_finite,
    verify_lemma1,
    verify_prop2,
    verify_squares,
    verify_structure,
)
from .words import (
    Word,
    chain_form,
    commutator,
    derived_word,
    evaluate,
    is_identity_of,
    lower_central_word,
    parse,
    shifted_commutator,
    square_commutator_word,
    to_text,
    variable,
)

__version__ = "0.1.0"
