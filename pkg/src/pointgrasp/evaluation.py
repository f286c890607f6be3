"""Ground-truth rescoring and the recall-at-high-precision sweep.

Predicted grasps are rescored with the same quality pipeline used for
labeling, against the scene's ground-truth meshes; any collision with
other scene geometry or a cross-object pinch scores zero.  The threshold
sweep reports precision (rescored quality positive) and recall over label
grasp points at each category threshold, and selects the smallest
threshold reaching the target precision.
"""

from dataclasses import dataclass, field

import numpy as np

from .geometry.gripper import GripperModel, collide
from .quality import QualityConfig, contact_sources, grasp_quality


@dataclass(frozen=True)
class MatchCriterion:
    max_point_distance: float = 5.0       # mm
    max_approach_angle_deg: float = 15.0

    def __post_init__(self):
        if self.max_point_distance <= 0 or self.max_approach_angle_deg <= 0:
            raise ValueError("criterion bounds must be positive")


@dataclass
class ThresholdRow:
    threshold: float
    precision: float
    recall: float
    kept: int


@dataclass
class EvalReport:
    rows: list
    target_precision: float
    criterion: MatchCriterion
    selected_threshold: float | None = None
    selected_recall: float | None = None
    reached_target: bool = False
    notes: list = field(default_factory=list)

    def as_dict(self):
        return {
            "target_precision": self.target_precision,
            "criterion": {
                "max_point_distance": self.criterion.max_point_distance,
                "max_approach_angle_deg":
                    self.criterion.max_approach_angle_deg,
            },
            "rows": [{"threshold": r.threshold, "precision": r.precision,
                      "recall": r.recall, "kept": r.kept}
                     for r in self.rows],
            "selected_threshold": self.selected_threshold,
            "selected_recall": self.selected_recall,
            "reached_target": self.reached_target,
            "notes": self.notes,
        }


def rescore(grasps, scene, models_by_name, gripper: GripperModel,
            qcfg: QualityConfig = QualityConfig()):
    """Ground-truth quality per grasp against the contacted object.

    scene is a SceneSpec; models_by_name maps object names to their
    ObjectSpec (object-frame mesh and physical attributes).  Zero when
    the gripper collides with the scene, the fingers land on different
    bodies, or the contacted body is the ground.
    """
    out = np.zeros(len(grasps))
    per_object = {}
    for k, placed in enumerate(scene.placed):
        spec = models_by_name[placed.name]
        per_object[k] = (scene.meshset.meshes[k + 1],
                         placed.pose.apply(spec.centroid), spec.mu,
                         spec.rho_max)
    for i, g in enumerate(grasps):
        if collide(gripper, g, scene.meshset):
            continue
        src = contact_sources(g, scene.meshset, gripper)
        if src is None or src[0] != src[1] or src[0] == 0:
            continue
        mesh, centroid, mu, rho = per_object[src[0] - 1]
        res = grasp_quality(g, mesh, centroid, mu, gripper, qcfg,
                            rho_max=rho)
        out[i] = res.q_c
    return out


def _matches(pred_points, pred_normals, label_point, label_normal,
             criterion: MatchCriterion):
    """Which predictions match one label grasp point."""
    if pred_points.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    d = np.linalg.norm(pred_points - label_point, axis=1)
    identity = d <= 1e-9
    cosang = np.clip(pred_normals @ label_normal, -1.0, 1.0)
    ang_ok = np.degrees(np.arccos(cosang)) <= criterion.max_approach_angle_deg
    return identity | ((d <= criterion.max_point_distance) & ang_ok)


def rahp(pred_probs, pred_points, pred_normals, rescored_q,
         label_points, label_normals, criterion: MatchCriterion,
         thresholds, target_precision=0.99):
    """Threshold sweep: precision from rescored quality, recall over labels.

    Empty prediction sets score precision 1 by convention so sweeps
    terminate cleanly.  The 0.573 operating point is always included.
    """
    pred_probs = np.asarray(pred_probs, dtype=np.float64)
    pred_points = np.asarray(pred_points, dtype=np.float64).reshape(-1, 3)
    pred_normals = np.asarray(pred_normals, dtype=np.float64).reshape(-1, 3)
    rescored_q = np.asarray(rescored_q, dtype=np.float64)
    label_points = np.asarray(label_points, dtype=np.float64).reshape(-1, 3)
    label_normals = np.asarray(label_normals,
                               dtype=np.float64).reshape(-1, 3)
    ths = sorted(set(float(t) for t in thresholds) | {0.573})
    n_labels = label_points.shape[0]

    match_matrix = np.zeros((n_labels, pred_probs.shape[0]), dtype=bool)
    for j in range(n_labels):
        match_matrix[j] = _matches(pred_points, pred_normals,
                                   label_points[j], label_normals[j],
                                   criterion)

    rows = []
    for t in ths:
        kept = pred_probs >= t
        nk = int(np.count_nonzero(kept))
        precision = 1.0 if nk == 0 \
            else float(np.count_nonzero(rescored_q[kept] > 0) / nk)
        if n_labels == 0:
            recall = 0.0
        else:
            recall = float(np.count_nonzero(
                match_matrix[:, kept].any(axis=1)) / n_labels)
        rows.append(ThresholdRow(t, precision, recall, nk))

    report = EvalReport(rows, target_precision, criterion)
    for r in rows:
        if r.precision >= target_precision:
            report.selected_threshold = r.threshold
            report.selected_recall = r.recall
            report.reached_target = True
            break
    if not report.reached_target:
        report.notes.append("NoThresholdReachesTarget")
    return report
