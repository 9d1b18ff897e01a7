// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidret/cli.hpp"

int main(int argc, char** argv) { return vidret::cli::run(argc, argv); }
