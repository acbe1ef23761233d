"""Implicit discourse relation sense classification toolkit."""

from .corpus import (RelationInstance, SenseInventory, build_inventory,
                     expand_multilabel, load_relations, save_relations,
                     split_by_sections, tokenize)
from .encoder import (BiLstmEncoder, EmbeddingTable, SentenceRepresentation,
                      encode_concat, encode_pooled, load_glove)
from .features import BrownClusterMap, load_brown_clusters, word_pair_features
from .model import (InputPlan, RelationModel, load_checkpoint, save_checkpoint)
from .nn import Adam, AdamState, Tensor, adam_step, finite_difference_check, make_rng
from .training import (EvalReport, TrainConfig, error_overlap, evaluate,
                       most_common_class, train)
from .vectors import (NgramTable, SentenceVectorStore, load_ngram_table,
                      load_vector_file, save_vector_file, sent2vec_compose)

__version__ = "0.1.0"
