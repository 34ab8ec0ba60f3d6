#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "anygraph/common.hpp"
#include "anygraph/dense.hpp"

namespace anygraph {

/// Binary matrix file: little-endian u64 rows, u64 cols, then rows*cols f32
/// values row-major. Values are widened to f64 on read.
DenseMatrix read_matrix_f32(const std::string& path);
void write_matrix_f32(const std::string& path, const DenseMatrix& m);

/// Edges CSV: one "src,dst" pair per line, zero-indexed decimal.
std::vector<std::pair<NodeId, NodeId>> read_edges_csv(const std::string& path);
void write_edges_csv(const std::string& path,
                     const std::vector<std::pair<NodeId, NodeId>>& edges);

struct LabelRow {
    NodeId node;
    std::int32_t cls;
    bool train;
};

/// Labels CSV: "node_id,class_id,split" with split in {train, test}.
std::vector<LabelRow> read_labels_csv(const std::string& path);
void write_labels_csv(const std::string& path,
                      const std::vector<LabelRow>& rows);

/// Whole-file helpers used for JSON artifacts.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace anygraph
