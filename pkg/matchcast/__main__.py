from matchcast.main import main

raise SystemExit(main())
