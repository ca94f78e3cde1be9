#pragma once

#include "gvf3d/dynamics.hpp"

namespace gvf3d::detail {

EventKind event_kind(StopReason r);
void fill_field_columns(TrajectorySample& out, const FieldSample& s);

}  // namespace gvf3d::detail
