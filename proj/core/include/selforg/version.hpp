#pragma once

namespace selforg {

const char* version();
const char* git_hash();

}  // namespace selforg
