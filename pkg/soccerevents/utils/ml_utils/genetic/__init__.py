from soccerevents.utils.ml_utils.genetic.genome import (GeneGrid, Genome, GenomeSpace, RuleGenomeSpace,
                                                         lehmer_decode, lehmer_encode)
from soccerevents.utils.ml_utils.genetic.operators import binary_tournament, blx_crossover, mutate
from soccerevents.utils.ml_utils.genetic.spea2 import (Fitness, dominates, environmental_selection, hypervolume,
                                                        nondominated, spea2_fitness)
