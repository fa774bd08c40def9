# Copyright 2026 The cactusdet authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Makes the extension module importable from the CMake build tree.

CACTUSDET_MODULE_DIR points at the directory holding _cactusdet*.so when
tests run under ctest; an installed wheel needs no help.
"""

import os
import sys

module_dir = os.environ.get("CACTUSDET_MODULE_DIR")
if module_dir and module_dir not in sys.path:
    sys.path.insert(0, module_dir)
