from tweetdemog.cli import main

raise SystemExit(main())
