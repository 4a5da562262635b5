// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "footcontact/evalcli.hpp"

int main(int argc, char** argv) { return footcontact::run_cli(argc, argv, std::cout, std::cerr); }
