"""Table annotation data synthesis: ingest real table structure/content,
restyle it, lay it out, render it, and emit full annotations, plus the
TEDS / TEDS-Struct / AP50 metrics used to validate the output."""

from .model import (GridCell, Rect, SourceTable, TableGrid, spanning_bucket,
                    spanning_cell_count, validate_grid)
from .ingest import (GridBoundaries, LineSegment, TextSpan,
                     infer_grid_from_lines, parse_markup_table,
                     snap_boundaries)
from .styling import (CategoryDescriptor, CellStyle, InnerBorder, OuterBorder,
                      StyleProfile, extract_style_profile, match_category,
                      perturb_profile, select_profile)
from .layout import (FixedFontMetrics, LayoutResult, measure_text_block,
                     solve_layout)
from .render import BoxGlyphRasterizer, Canvas, RealFontRasterizer, render_table
from .annotate import (AnnotationRecord, emit_annotation,
                       emit_structure_markup, structure_tokens)
from .metrics import (Detection, DetectionSet, ap50, ap50_dataset,
                      parse_table_tree, teds, tree_edit_distance)
from .pipeline import (DatasetStats, PipelineConfig, dataset_stats,
                       run_pipeline, stratified_sample)

__version__ = "0.1.0"
