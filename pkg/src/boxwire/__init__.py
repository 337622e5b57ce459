"""Exact wiring-induced non-locality of tripartite binary non-signaling boxes."""

from .bell import (CHSHIndex, IsotropicBox, chsh, cost2, iso_alpha, iso_box, max_chsh,
                   robustness2, twirl, vertex_B)
from .box_model import (TABLE_FRAME, Box2, Box3, Correlators3, Relabeling, check_nonsignaling,
                        from_correlators, marginal, parse_box, relabel2, relabel3, serialize_box,
                        to_correlators)
from .classes import (ClassSpec, Cut, Decomposition, bipartite_local, member_class, member_NSBL,
                      member_S, member_svetlichny, member_T2, member_TOBL)
from .lp import LPProblem, LPResult, check_certificate, solve
from .quantify import (BoundRecord, WNRecord, cost3_exact, cost_lower_bound, mwn_box, mwn_class,
                       robustness3_exact, robustness_lower_bound, signal_weight_bound, wn_class)
from .wiring import (Wiring, apply, canonical_wirings, format_wiring, full_wirings,
                     parse_wiring, relabel_orbit)

__version__ = "0.1.0"
