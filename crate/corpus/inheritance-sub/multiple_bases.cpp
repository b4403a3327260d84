struct Left {
  int l;
  Left() { l = 10; }
  int left() { return l; }
};
struct Right {
  int r;
  Right() { r = 20; }
  int right() { return r; }
};
struct Both : Left, Right {
  int sum() { return left() + right(); }
};
int main() {
  Both b;
  Right *r = &b;
  assert(r->right() == 20);
  assert(b.sum() == 30);
  return 0;
}
