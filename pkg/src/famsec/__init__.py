"""Machine self-confidence toolkit for MDP agents.

Computes two indicators for a decision-making agent on a pursuit-evasion
delivery domain: outcome assessment (partial-moment margins of the
cumulative-reward distribution against a minimal standard, on [-1, 1])
and solver quality (a signed, range-scaled Hellinger comparison of the
deployed solver's reward distribution to a trusted reference, on (0, 2)).
"""

__version__ = "0.1.0"
