"""Exception types shared across the pipeline.

The CLI maps these onto exit codes: ConfigError -> 2, data-shaped errors
(DataError, ContractError, ValueError) -> 3, ProviderError -> 4.
"""


class ConfigError(Exception):
    """Invalid or inconsistent configuration (bad language pair, scheme/mode
    pairing, missing credential, malformed provider settings)."""


class ContractError(Exception):
    """A caller violated an operation's precondition (mismatched segment ids,
    negative penalty, missing referenced segment)."""


class DataError(Exception):
    """Malformed input data (bad JSONL line, missing TSV columns)."""


class ProviderError(Exception):
    """The LLM provider could not be driven at all (distinct from per-request
    transport failures, which are recorded per response)."""


class DegenerateInput(Exception):
    """Statistic undefined for this input (zero variance, all-tied ranks)."""


class EmptyInput(Exception):
    """An aggregate statistic was requested over zero observations."""
