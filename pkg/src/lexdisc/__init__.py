"""Discriminability of word-form categories across speech registers."""

__version__ = "0.1.0"

from .corpus import (Lexicon, ManifestError, SampledLexicon, TokenRecord, WordType,
                     common_types, load_manifest, remove_onomatopoeia, sample_lexicons,
                     summarize_corpus)
from .distance import DistanceTable, build_distance_table, dtw_distance, frame_distance
from .features import FeatureSequence, FrontendConfig, featurize, hz_to_mel, make_filterbank, mel_to_hz
from .metrics import (PairScore, abx_aggregate, abx_pair, edit_distance, mean_ned, medoids,
                      ned, separation, variability)
from .stats import PairedComparison, cohens_d, paired_t, relative_effect
