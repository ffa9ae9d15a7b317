#pragma once

#include <string>
#include <vector>

namespace ac::assets {

/// Bundled copy of assets/<name>; throws io-failure for unknown names.
const std::string& get(const std::string& name);

std::vector<std::string> names();

} // namespace ac::assets
