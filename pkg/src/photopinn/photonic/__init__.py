from .mesh import MziMesh, clements_placements, mzi_rotation
from .svd import SvdBlock, block_assemble, block_partitioned_layer, svd_forward
from .noise import FrozenNoise, NoiseModel, apply_nonidealities, quantize_phases
from .model import DENSE_BLOCK_SIZE, PhotonicDense, PhotonicMlp, PhotonicTT
from .counting import dense_mzi_count, mesh_mzi_count, model_mzi_counts, tt_mzi_count, tt_replication
from .cost import ARCHITECTURES, CostParams, FOOTPRINT_TABLE, footprint, latency
