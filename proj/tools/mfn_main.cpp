// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#include "commands.hpp"

int main(int argc, char** argv) { return mfn::cli::run(argc, argv); }
