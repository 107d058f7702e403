from beaconpursuit.cli import main

raise SystemExit(main())
