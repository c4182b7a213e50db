"""Stabilizer-level simulation of metasurface-controlled photonic protocols."""
from .dense import DenseState
from .scripts import (MeasurementRecord, ProtocolScript, Step, ancilla_conditioned_flip,
                      apply_byproduct, find_byproduct,
                      apply_frame, cluster1d_script, ghz_script, ghz_stabilizers,
                      graph_stabilizers, parallel_cnot, preset, run_protocol,
                      run_protocol_dense, tableau_matches_dense, tree_script, verify_graph_state,
                      verify_stabilizers)
from .tableau import StabilizerTableau

__all__ = ["DenseState", "MeasurementRecord", "apply_byproduct", "find_byproduct", "ProtocolScript", "StabilizerTableau", "Step",
           "ancilla_conditioned_flip", "apply_frame", "cluster1d_script", "ghz_script",
           "ghz_stabilizers", "graph_stabilizers", "parallel_cnot", "preset", "run_protocol",
           "run_protocol_dense", "tableau_matches_dense", "tree_script", "verify_graph_state",
           "verify_stabilizers"]
