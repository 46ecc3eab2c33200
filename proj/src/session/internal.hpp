#pragma once

#include "sgaudit/session/types.hpp"

namespace sgaudit::session::detail {

void rebuild_catalog(AuditSession& s);

}  // namespace sgaudit::session::detail
