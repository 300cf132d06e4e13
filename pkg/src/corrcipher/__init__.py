"""Exact secrecy analysis of a two-source Shannon cipher system.

Two correlated sources are compressed by a random-binning code, parts of
the bin indices are one-time padded, and a wiretapper sees the padded words
plus a raw block of one source.  Everything is enumerated exactly at small
block lengths.
"""
from .cipher import (KeyPlan, KeySchedule, SecurityTarget, TransmittedPair, build_transmission,
                     chain_mask, codebook_config_for_plan, generate_keys, mask, plan_keys,
                     receiver_decrypt, unmask)
from .eavesdropper_oracle import (LeakageReport, ObservationSpec, exact_leakage,
                                  inequality_suite, pad_independence_check, slot_information)
from .errors import (ConfigInvalid, CorrCipherError, EnumerationTooLarge, IoFailure,
                     LengthMismatch, NegativeProbability, NoConsistentPair, NoKeyedSlotAvailable,
                     NotNormalized, OutOfRange, PlanMismatch, RateBelowSlepianWolf, SlotNotKeyed,
                     TargetOutOfRange, ZeroModulus)
from .harness import ExperimentConfig, ReportRow, emit_report, load_config, run_experiment
from .rate_region import (RatePoint, RegionVerdict, boundary_sweep, converse_key_bounds,
                          in_region_case1, in_region_case2, in_region_case3)
from .source_model import (JointSource, MuComponents, SequencePair, SourceStats, build_source,
                           dsbs, entropies, mu_components, sample_pair)
from .sw_codec import (BinningCodebook, CodebookConfig, PrototypeCodeword, build_codebook,
                       corner_config, decode, encode, split, unsplit)

__version__ = "0.1.0"
